"""Shared attack plumbing: surrogate handles, the epsilon-ball clip and sign steps."""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from sta_mdct.attacks.objectives import AttackObjective, evaluate
from sta_mdct.audio.wav import round_half_away
from sta_mdct.config import SAMPLE_MAX, SAMPLE_MIN
from sta_mdct.errors import ConfigError, GradientDivergenceError, InvariantViolation, ShapeMismatchError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.telemetry import gradient_evaluations_total, invariant_violations_total

logger = logging.getLogger(__name__)

L1_FLOOR = 1e-12

# (point, iteration) -> gradient of the attack objective at that point
GradientFn = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class Surrogate:
    """A white-box model plus the objective built from its own enrollment profiles."""

    model: EmbeddingModel
    objective: AttackObjective
    name: str = ""

    def loss_and_gradient(self, samples: np.ndarray) -> tuple[float, np.ndarray]:
        gradient_evaluations_total.labels(architecture=self.model.architecture).inc()
        return evaluate(self.objective, self.model, samples)


@dataclass(frozen=True)
class FusedSurrogate:
    """Weighted sum of several surrogates' objectives (and therefore of their gradients)."""

    members: tuple[Surrogate, ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.members:
            raise ConfigError("an ensemble needs at least one surrogate")
        if not self.weights:
            object.__setattr__(self, "weights", tuple([1.0 / len(self.members)] * len(self.members)))
        validate_weights(self.weights, len(self.members))

    @property
    def name(self) -> str:
        return "+".join(m.name for m in self.members)

    def loss_and_gradient(self, samples: np.ndarray) -> tuple[float, np.ndarray]:
        loss, grad = self.members[0].loss_and_gradient(samples)
        total_loss, total_grad = self.weights[0] * loss, self.weights[0] * grad
        for weight, member in zip(self.weights[1:], self.members[1:], strict=True):
            loss, grad = member.loss_and_gradient(samples)
            total_loss += weight * loss
            total_grad = total_grad + weight * grad
        return total_loss, total_grad


AnySurrogate = Surrogate | FusedSurrogate


def validate_weights(weights: Sequence[float], n_members: int) -> None:
    if len(weights) != n_members:
        raise ConfigError(f"{len(weights)} ensemble weights for {n_members} surrogates")
    if any(w < 0 for w in weights):
        raise ConfigError(f"ensemble weights must be non-negative, got {list(weights)}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ConfigError(f"ensemble weights must sum to 1, got {sum(weights)}")


def clip(x_adv: np.ndarray, x: np.ndarray, epsilon: float) -> np.ndarray:
    """
    Project onto the epsilon-ball around x, then onto the valid sample range.

    Raises:
        ShapeMismatchError: Lengths differ.
    """
    if x_adv.shape != x.shape:
        raise ShapeMismatchError(f"adversarial length {x_adv.shape} != clean length {x.shape}")
    return np.clip(np.clip(x_adv, x - epsilon, x + epsilon), SAMPLE_MIN, SAMPLE_MAX)


def sign_step(x_adv: np.ndarray, x: np.ndarray, direction: np.ndarray, step: float, epsilon: float) -> np.ndarray:
    """x_adv + step * sign(direction), clipped. sign(0) = 0."""
    return clip(x_adv + step * np.sign(direction), x, epsilon)


def ensure_finite(values: np.ndarray | float, iteration: int, attacker: str) -> None:
    if not np.all(np.isfinite(values)):
        logger.error(f"[ATTACK] {attacker}: non-finite gradient at iteration {iteration}")
        raise GradientDivergenceError(iteration, attacker)


def check_ball(x_adv: np.ndarray, x: np.ndarray, epsilon: float, context: str = "") -> float:
    """
    Verify the epsilon-ball and sample-range invariants.

    Returns:
        float: max |x_adv - x|.

    Raises:
        InvariantViolation: Either invariant is breached.
    """
    linf = float(np.max(np.abs(x_adv - x))) if x.size else 0.0
    if linf > epsilon or np.any(x_adv < SAMPLE_MIN) or np.any(x_adv > SAMPLE_MAX):
        invariant_violations_total.inc()
        raise InvariantViolation(f"{context}: max|x_adv - x| = {linf} exceeds epsilon = {epsilon} or range breached")
    return linf


def quantize_within_ball(x_adv: np.ndarray, x: np.ndarray, epsilon: float) -> np.ndarray:
    """
    Round to integer samples without leaving the ball around an integer-valued x.

    Rounding can push a sample on the ball boundary outside it when epsilon is not an
    integer; those samples are pulled back to the nearest integer inside.
    """
    rounded = round_half_away(x_adv)
    lower = np.maximum(np.ceil(x - epsilon), SAMPLE_MIN)
    upper = np.minimum(np.floor(x + epsilon), SAMPLE_MAX)
    return np.clip(rounded, lower, upper)
