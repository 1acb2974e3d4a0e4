"""Ensemble STA: per-model averaged transformed gradients fused by a weighted sum."""

import logging
from collections.abc import Sequence

import numpy as np

from sta_mdct.attacks.common import GradientFn, Surrogate, validate_weights
from sta_mdct.attacks.gradient_sign import sign_iterations
from sta_mdct.attacks.sta import transformed_gradient
from sta_mdct.errors import ConfigError
from sta_mdct.schemas.attack import AttackConfig

logger = logging.getLogger(__name__)


def resolve_weights(n_members: int, weights: Sequence[float] | None) -> tuple[float, ...]:
    """Explicit weights, validated, or uniform 1/q."""
    if n_members < 1:
        raise ConfigError("ensemble is empty")
    if weights is None:
        return tuple([1.0 / n_members] * n_members)
    validate_weights(weights, n_members)
    return tuple(float(w) for w in weights)


def fused_sta_gradient_fn(surrogates: Sequence[Surrogate], weights: Sequence[float], cfg: AttackConfig) -> GradientFn:
    params = cfg.transform

    def gradient(point: np.ndarray, t: int) -> np.ndarray:
        # fixed member order keeps the sum bit-reproducible
        k = weights[0] * transformed_gradient(point, surrogates[0], params, cfg.seed, t, cfg.n_transforms)
        for weight, surrogate in zip(weights[1:], surrogates[1:], strict=True):
            k = k + weight * transformed_gradient(point, surrogate, params, cfg.seed, t, cfg.n_transforms)
        return k

    return gradient


def ensemble_sta_attack(
    x: np.ndarray, surrogates: Sequence[Surrogate], cfg: AttackConfig, weights: Sequence[float] | None = None
) -> np.ndarray:
    """
    Run ensemble STA over q surrogates.

    Args:
        x (np.ndarray): Clean samples.
        surrogates (Sequence[Surrogate]): One handle per model, each with an objective
            built from that model's own enrollment profiles.
        cfg (AttackConfig): Attack configuration; `cfg.ensemble_weights` is used when
            `weights` is not given.
        weights (Sequence[float] | None): Fusion weights, uniform by default.

    Returns:
        np.ndarray: Final iterate.

    Raises:
        ConfigError: Empty ensemble or invalid weights.
    """
    resolved = resolve_weights(len(surrogates), weights if weights is not None else cfg.ensemble_weights)
    names = "+".join(s.name or s.model.architecture for s in surrogates)
    logger.info(f"[ATTACK] ensemble {cfg.attacker.value} over {names} with weights {list(resolved)}")
    return sign_iterations(
        x, fused_sta_gradient_fn(surrogates, resolved, cfg), cfg, cfg.update_rule, f"ensemble-{cfg.attacker.value}"
    )
