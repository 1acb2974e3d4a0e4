"""
Canonical sample representation shared by every package.

Samples are float64 values on the 16-bit integer scale, [-32768, +32767], at 16 kHz.
Intermediate arrays inside attacks (transformed inputs, look-ahead points) may leave
that range; only values crossing a pipeline boundary are validated.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sta_mdct.config import SAMPLE_MAX, SAMPLE_MIN, SAMPLE_RATE
from sta_mdct.errors import InputTooShortError, ShapeMismatchError

ArrayLike = npt.ArrayLike


@dataclass(frozen=True)
class Waveform:
    """Mono PCM waveform on the 16-bit integer scale."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ShapeMismatchError(f"waveform must be 1-D, got shape {samples.shape}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def in_range(self) -> bool:
        return bool(np.all((self.samples >= SAMPLE_MIN) & (self.samples <= SAMPLE_MAX)))

    def validate(self, min_length: int = 1) -> "Waveform":
        """
        Check the pipeline-entry invariants.

        Args:
            min_length (int): Minimum sample count (typically one MDCT window).

        Returns:
            Waveform: self, for chaining.

        Raises:
            ShapeMismatchError: Wrong sample rate or out-of-range samples.
            InputTooShortError: Fewer than `min_length` samples.
        """
        if self.sample_rate != SAMPLE_RATE:
            raise ShapeMismatchError(f"sample_rate must be {SAMPLE_RATE}, got {self.sample_rate}")
        if not self.in_range():
            raise ShapeMismatchError("samples outside [-32768, 32767]")
        if len(self) < min_length:
            raise InputTooShortError(f"waveform has {len(self)} samples, need at least {min_length}")
        return self


def as_samples(x: "Waveform | ArrayLike") -> np.ndarray:
    """Return the float64 sample array of a Waveform or array-like."""
    if isinstance(x, Waveform):
        return x.samples
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeMismatchError(f"expected a 1-D sample array, got shape {arr.shape}")
    return arr


def clamp_to_range(samples: np.ndarray) -> np.ndarray:
    """Clamp to the valid 16-bit sample range."""
    return np.clip(samples, SAMPLE_MIN, SAMPLE_MAX)
