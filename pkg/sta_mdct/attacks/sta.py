"""
Spectrum transformation attack (STA-MDCT, and STA-DCT with the DCT variant).

Each outer iteration draws N transform samples, differentiates L(T_i(x_adv)) exactly
through the transform's adjoint, averages the N gradients and takes a sign step.
"""

import logging

import numpy as np

from sta_mdct.attacks.common import GradientFn, Surrogate
from sta_mdct.attacks.gradient_sign import sign_iterations
from sta_mdct.schemas.attack import AttackConfig, SpectrumTransformParams
from sta_mdct.transform.spectrum import apply, apply_adjoint, sample_transform
from sta_mdct.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def transformed_gradient(
    x_adv: np.ndarray, surrogate: Surrogate, params: SpectrumTransformParams, seed: int, t: int, n_transforms: int
) -> np.ndarray:
    """
    Mean over i < N of the gradient of L(T_i(x)) at x_adv.

    Sample i of iteration t is drawn with seed derive_seed(seed, t, i), so every
    surrogate of an ensemble sees the same transforms. With sigma = rho = 0 the
    transform is the identity and the plain gradient at x_adv is returned.

    Args:
        x_adv (np.ndarray): Current iterate.
        surrogate (Surrogate): White-box model and objective.
        params (SpectrumTransformParams): Transform parameters.
        seed (int): Attack seed.
        t (int): Outer iteration index.
        n_transforms (int): N.

    Returns:
        np.ndarray: Averaged gradient, same shape as x_adv.
    """
    if params.is_identity:
        return surrogate.loss_and_gradient(x_adv)[1]
    gradients = []
    for i in range(n_transforms):
        sample = sample_transform(params, derive_seed(seed, t, i), x_adv.shape[0])
        _, grad = surrogate.loss_and_gradient(apply(x_adv, sample, params))
        gradients.append(apply_adjoint(grad, sample, params))
    return np.mean(np.stack(gradients), axis=0)


def sta_gradient_fn(surrogate: Surrogate, cfg: AttackConfig) -> GradientFn:
    params = cfg.transform
    return lambda point, t: transformed_gradient(point, surrogate, params, cfg.seed, t, cfg.n_transforms)


def sta_attack(x: np.ndarray, surrogate: Surrogate, cfg: AttackConfig) -> np.ndarray:
    """
    Run STA on a single surrogate.

    The inner update is I-FGSM unless `cfg.update_rule` selects the momentum or
    Nesterov recurrence instead.

    Returns:
        np.ndarray: Final iterate.
    """
    name = cfg.attacker.value
    logger.debug(f"[ATTACK] {name}: N={cfg.n_transforms} sigma={cfg.sigma} rho={cfg.rho} rule={cfg.update_rule}")
    return sign_iterations(x, sta_gradient_fn(surrogate, cfg), cfg, cfg.update_rule, name)
