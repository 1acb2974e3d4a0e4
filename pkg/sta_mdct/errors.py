"""Exception hierarchy shared by every sta_mdct package.

Library code raises these; only the CLI turns them into exit codes.
"""


class StaMdctError(Exception):
    """Base class for all errors raised by sta_mdct."""


class AudioFormatError(StaMdctError):
    """Raised when a WAV file is malformed or uses an unsupported encoding."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class AudioWriteError(StaMdctError):
    """Raised when a waveform cannot be written (bad path or out-of-range samples)."""


class ShapeMismatchError(StaMdctError):
    """Raised when two arrays that must agree in shape or length do not."""


class InputTooShortError(StaMdctError):
    """Raised when a waveform is shorter than the window a stage needs."""


class ConfigError(StaMdctError):
    """Raised for invalid configuration files or values."""


class CorpusError(StaMdctError):
    """Raised when a corpus is missing, malformed or too small for a request."""


class ModelFormatError(StaMdctError):
    """Raised when a model or profile file cannot be decoded, or a model lacks a layer."""


class GradientDivergenceError(StaMdctError):
    """Raised when an attack produces a non-finite gradient.

    Aborts the attack immediately; the iteration index is kept for the report.
    """

    def __init__(self, iteration: int, attacker: str):
        super().__init__(f"{attacker}: non-finite gradient at iteration {iteration}")
        self.iteration = iteration
        self.attacker = attacker


class TrainingDivergenceError(StaMdctError):
    """Raised when the training loss becomes NaN or infinite."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class InvariantViolation(StaMdctError):
    """Raised when a hard invariant (e.g. the epsilon ball) is breached."""


class UndefinedMetricError(StaMdctError):
    """Raised when a metric needs data the score set does not contain."""


class ExperimentError(StaMdctError):
    """Raised when an experiment plan cannot be executed."""
