"""
FGSM family.

    fgsm      x_adv = x + eps * sign(grad L(x))
    i-fgsm    x_{t+1} = Clip(x_t + alpha * sign(grad L(x_t)))
    mi-fgsm   g_{t+1} = mu * g_t + grad L(x_t) / ||grad L(x_t)||_1;  x_{t+1} = Clip(x_t + alpha * sign(g_{t+1}))
    ni-fgsm   as mi-fgsm, with the gradient taken at x_t + alpha * mu * g_t

All iterative variants return the final iterate.
"""

import logging

import numpy as np

from sta_mdct.attacks.common import L1_FLOOR, AnySurrogate, GradientFn, ensure_finite, sign_step
from sta_mdct.schemas.attack import AttackConfig, UpdateRule

logger = logging.getLogger(__name__)


def fgsm(x: np.ndarray, surrogate: AnySurrogate, epsilon: float) -> np.ndarray:
    """
    One-step attack.

    Args:
        x (np.ndarray): Clean samples.
        surrogate (AnySurrogate): White-box model and objective.
        epsilon (float): Step and ball radius.

    Returns:
        np.ndarray: Adversarial samples; every sample differs from x by -eps, 0 or +eps
            before the range clamp.
    """
    _, grad = surrogate.loss_and_gradient(x)
    ensure_finite(grad, 0, "fgsm")
    return sign_step(x, x, grad, epsilon, epsilon)


def sign_iterations(
    x: np.ndarray, gradient_fn: GradientFn, cfg: AttackConfig, rule: UpdateRule, attacker: str
) -> np.ndarray:
    """
    Run T sign-gradient iterations with the given update rule.

    The gradient source is pluggable so the transformed-gradient attacks reuse the same
    recurrences.

    Args:
        x (np.ndarray): Clean samples.
        gradient_fn (GradientFn): (point, iteration) -> gradient.
        cfg (AttackConfig): epsilon, step, iterations and momentum decay.
        rule (UpdateRule): i-fgsm, mi-fgsm or ni-fgsm.
        attacker (str): Name used in errors and logs.

    Returns:
        np.ndarray: Final iterate.

    Raises:
        GradientDivergenceError: A gradient contains NaN or inf.
    """
    alpha = cfg.step
    x_adv = x.copy()
    momentum = np.zeros_like(x)
    for t in range(cfg.iterations):
        point = x_adv + alpha * cfg.momentum * momentum if rule == "ni-fgsm" else x_adv
        grad = gradient_fn(point, t)
        ensure_finite(grad, t, attacker)
        if rule == "i-fgsm":
            direction = grad
        else:
            momentum = cfg.momentum * momentum + grad / max(float(np.abs(grad).sum()), L1_FLOOR)
            direction = momentum
        x_adv = sign_step(x_adv, x, direction, alpha, cfg.epsilon)
        logger.debug(f"[ATTACK] {attacker} iteration {t + 1}/{cfg.iterations}")
    return x_adv


def _plain_gradient(surrogate: AnySurrogate) -> GradientFn:
    return lambda point, t: surrogate.loss_and_gradient(point)[1]


def ifgsm(x: np.ndarray, surrogate: AnySurrogate, cfg: AttackConfig) -> np.ndarray:
    return sign_iterations(x, _plain_gradient(surrogate), cfg, "i-fgsm", "i-fgsm")


def mifgsm(x: np.ndarray, surrogate: AnySurrogate, cfg: AttackConfig) -> np.ndarray:
    return sign_iterations(x, _plain_gradient(surrogate), cfg, "mi-fgsm", "mi-fgsm")


def nifgsm(x: np.ndarray, surrogate: AnySurrogate, cfg: AttackConfig) -> np.ndarray:
    return sign_iterations(x, _plain_gradient(surrogate), cfg, "ni-fgsm", "ni-fgsm")
