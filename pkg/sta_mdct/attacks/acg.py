"""
Auto conjugate gradient attack.

    y_{t-1} = grad L(x_{t-1}) - grad L(x_t)
    beta_t  = <-grad L(x_t), y_{t-1}> / <s_{t-1}, y_{t-1}>
    s_t     = grad L(x_t) + beta_t * s_{t-1}
    x_{t+1} = Clip(x_t + eta_t * sign(s_t))

with s_0 = 0 and eta_0 = 2 eps / T. eta is halved (at most once per iteration) when
the best loss so far did not improve, and at iterations ceil(T/4), ceil(T/2) and
ceil(3T/4). The best-loss iterate seen, including the final one, is returned.
"""

import logging
import math

import numpy as np

from sta_mdct.attacks.common import AnySurrogate, ensure_finite, sign_step
from sta_mdct.schemas.attack import AttackConfig

logger = logging.getLogger(__name__)

BETA_DENOMINATOR_FLOOR = 1e-12


def hestenes_stiefel_beta(grad: np.ndarray, prev_grad: np.ndarray, prev_direction: np.ndarray) -> float:
    """beta^HS, or 0 when |<s_{t-1}, y_{t-1}>| is below 1e-12."""
    y = prev_grad - grad
    denominator = float(np.dot(prev_direction, y))
    if abs(denominator) < BETA_DENOMINATOR_FLOOR:
        return 0.0
    return float(np.dot(-grad, y)) / denominator


def halving_checkpoints(iterations: int) -> set[int]:
    return {math.ceil(0.25 * iterations), math.ceil(0.5 * iterations), math.ceil(0.75 * iterations)}


def acg(x: np.ndarray, surrogate: AnySurrogate, cfg: AttackConfig) -> np.ndarray:
    """
    Run ACG for `cfg.iterations` steps.

    Args:
        x (np.ndarray): Clean samples.
        surrogate (AnySurrogate): White-box model and objective.
        cfg (AttackConfig): epsilon, iterations and the initial step.

    Returns:
        np.ndarray: Best-loss iterate.

    Raises:
        GradientDivergenceError: Loss or gradient becomes non-finite.
    """
    checkpoints = halving_checkpoints(cfg.iterations)
    eta = cfg.acg_step
    x_adv = x.copy()
    best, best_loss = x_adv, -np.inf
    prev_grad: np.ndarray | None = None
    direction = np.zeros_like(x)

    for t in range(1, cfg.iterations + 1):
        loss, grad = surrogate.loss_and_gradient(x_adv)
        ensure_finite(grad, t, "acg")
        ensure_finite(loss, t, "acg")
        improved = loss > best_loss
        if improved:
            best, best_loss = x_adv, loss
        if t > 1 and (not improved or t in checkpoints):
            eta /= 2
        beta = 0.0 if prev_grad is None else hestenes_stiefel_beta(grad, prev_grad, direction)
        direction = grad + beta * direction
        x_adv = sign_step(x_adv, x, direction, eta, cfg.epsilon)
        prev_grad = grad
        logger.debug(f"[ATTACK] acg iteration {t}/{cfg.iterations}: loss={loss:.6f} eta={eta:g} beta={beta:.4g}")

    loss, _ = surrogate.loss_and_gradient(x_adv)
    ensure_finite(loss, cfg.iterations + 1, "acg")
    if loss > best_loss:
        best = x_adv
    return best
