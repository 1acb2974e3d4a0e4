"""
Attack objectives for verification and identification, and the matching decision rules.

Every objective is written so the attacker maximizes it:

    asv-imp   L = s(enroll, x)
    asv-eva   L = -s(enroll, x)
    csi       L = s_t - max_{r != t} s_r
    osi       L = s_t - max(max_{r != t} s_r, theta)

Maxima break ties toward the lowest index. In the OSI objective the competitor branch
wins ties against theta; the theta branch carries no gradient.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform
from sta_mdct.errors import ConfigError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.nets.speakers import SpeakerProfile, profile_matrix

ACCEPT = "accept"
REJECT = "reject"


class Task(str, Enum):
    ASV_IMPERSONATION = "asv-imp"
    ASV_EVASION = "asv-eva"
    CSI = "csi"
    OSI = "osi"

    @property
    def is_verification(self) -> bool:
        return self in (Task.ASV_IMPERSONATION, Task.ASV_EVASION)


@dataclass(frozen=True)
class AttackObjective:
    """
    Task, enrollment profiles, target index (0-based) and decision threshold.

    Profiles belong to one model: an objective is only meaningful for the model whose
    embeddings were used to enroll them.
    """

    task: Task
    profiles: tuple[SpeakerProfile, ...]
    target: int = 0
    threshold: float | None = None

    def __post_init__(self):
        if not self.profiles:
            raise ConfigError("an objective needs at least one enrollment profile")
        if not 0 <= self.target < len(self.profiles):
            raise ConfigError(f"target index {self.target} outside [0, {len(self.profiles)})")
        if self.threshold is not None and not np.isfinite(self.threshold) and self.threshold != -np.inf:
            raise ConfigError(f"threshold must be finite or -inf, got {self.threshold}")

    @property
    def n_speakers(self) -> int:
        return len(self.profiles)

    def matrix(self) -> np.ndarray:
        return profile_matrix(self.profiles)

    def scores(self, embedding: np.ndarray) -> np.ndarray:
        return self.matrix() @ embedding

    def validate(self) -> None:
        """Raise ConfigError when the task's structural requirements are not met."""
        if self.task.is_verification and self.n_speakers != 1:
            raise ConfigError(f"{self.task.value} needs exactly one enrollment profile, got {self.n_speakers}")
        if self.task == Task.CSI and self.n_speakers < 2:
            raise ConfigError(f"csi needs at least 2 enrolled speakers, got {self.n_speakers}")
        if self.task == Task.OSI and self.threshold is None:
            raise ConfigError("osi needs a decision threshold")


def _competitor(scores: np.ndarray, target: int) -> int | None:
    """Lowest-index arg-max over r != target, None when there is no other speaker."""
    if scores.shape[0] < 2:
        return None
    masked = scores.copy()
    masked[target] = -np.inf
    return int(np.argmax(masked))


def objective_from_scores(obj: AttackObjective, scores: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Objective value and its gradient w.r.t. the score vector.

    Args:
        obj (AttackObjective): Objective.
        scores (np.ndarray): s_r for every enrolled speaker.

    Returns:
        tuple[float, np.ndarray]: (L, dL/ds).
    """
    obj.validate()
    d_scores = np.zeros_like(scores)
    t = obj.target
    if obj.task == Task.ASV_IMPERSONATION:
        d_scores[0] = 1.0
        return float(scores[0]), d_scores
    if obj.task == Task.ASV_EVASION:
        d_scores[0] = -1.0
        return float(-scores[0]), d_scores

    d_scores[t] = 1.0
    competitor = _competitor(scores, t)
    best_other = -np.inf if competitor is None else float(scores[competitor])
    if obj.task == Task.CSI:
        d_scores[competitor] -= 1.0
        return float(scores[t] - best_other), d_scores

    threshold = float(obj.threshold)  # type: ignore[arg-type]
    if competitor is not None and best_other >= threshold:
        d_scores[competitor] -= 1.0
        return float(scores[t] - best_other), d_scores
    return float(scores[t] - threshold), d_scores


def evaluate(obj: AttackObjective, model: EmbeddingModel, x: Waveform | ArrayLike) -> tuple[float, np.ndarray]:
    """Objective value and exact input gradient on `model`."""
    embedding, cache = model.forward(x)
    matrix = obj.matrix()
    value, d_scores = objective_from_scores(obj, matrix @ embedding)
    return value, model.input_gradient(cache, matrix.T @ d_scores)


def loss_asv(obj: AttackObjective, model: EmbeddingModel, x: Waveform | ArrayLike) -> tuple[float, np.ndarray]:
    if not obj.task.is_verification:
        raise ConfigError(f"loss_asv called with task {obj.task.value}")
    return evaluate(obj, model, x)


def loss_csi(obj: AttackObjective, model: EmbeddingModel, x: Waveform | ArrayLike) -> tuple[float, np.ndarray]:
    if obj.task != Task.CSI:
        raise ConfigError(f"loss_csi called with task {obj.task.value}")
    return evaluate(obj, model, x)


def loss_osi(obj: AttackObjective, model: EmbeddingModel, x: Waveform | ArrayLike) -> tuple[float, np.ndarray]:
    if obj.task != Task.OSI:
        raise ConfigError(f"loss_osi called with task {obj.task.value}")
    return evaluate(obj, model, x)


def decide(task: Task, scores: Sequence[float] | np.ndarray, threshold: float | None = None) -> str | int | None:
    """
    Decision rule of the victim system.

    ASV: "accept" when s >= theta, else "reject". CSI: arg-max index (lowest on ties).
    OSI: arg-max index when its score reaches theta, else None (rejected as unknown).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if task.is_verification:
        if threshold is None:
            raise ConfigError("verification decisions need a threshold")
        return ACCEPT if scores[0] >= threshold else REJECT
    best = int(np.argmax(scores))
    if task == Task.CSI:
        return best
    if threshold is None:
        raise ConfigError("osi decisions need a threshold")
    return best if scores[best] >= threshold else None


def attack_succeeded(obj: AttackObjective, scores: np.ndarray) -> bool:
    """Whether the victim decision on `scores` is the outcome the attacker wants."""
    decision = decide(obj.task, scores, obj.threshold)
    if obj.task == Task.ASV_IMPERSONATION:
        return decision == ACCEPT
    if obj.task == Task.ASV_EVASION:
        return decision == REJECT
    return decision == obj.target
