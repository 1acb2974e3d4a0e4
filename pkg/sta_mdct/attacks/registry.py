"""
Single entry point for every attacker.

`run_attack` validates the input, dispatches on `AttackConfig.attacker`, checks the
epsilon-ball invariant on the result and records attack telemetry. Generation only
ever sees surrogate handles; victims are scored elsewhere.
"""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from sta_mdct.attacks.acg import acg
from sta_mdct.attacks.common import AnySurrogate, FusedSurrogate, Surrogate, check_ball
from sta_mdct.attacks.ensemble import ensemble_sta_attack, resolve_weights
from sta_mdct.attacks.gradient_sign import fgsm, ifgsm, mifgsm, nifgsm
from sta_mdct.attacks.sta import sta_attack
from sta_mdct.audio.waveform import ArrayLike, Waveform
from sta_mdct.errors import ConfigError, StaMdctError
from sta_mdct.schemas.attack import AttackConfig, AttackerKind
from sta_mdct.telemetry import attack_duration_seconds, attacks_total, errors_total

logger = logging.getLogger(__name__)

_SIGN_ATTACKERS = {
    AttackerKind.IFGSM: ifgsm,
    AttackerKind.MIFGSM: mifgsm,
    AttackerKind.NIFGSM: nifgsm,
    AttackerKind.ACG: acg,
}


@dataclass(frozen=True)
class AttackResult:
    """Adversarial samples plus what produced them."""

    adversarial: np.ndarray
    attacker: AttackerKind
    surrogates: tuple[str, ...]
    linf: float
    duration: float

    def waveform(self) -> Waveform:
        return Waveform(self.adversarial)


def _fused(surrogates: Sequence[Surrogate], cfg: AttackConfig) -> AnySurrogate:
    if len(surrogates) == 1:
        return surrogates[0]
    return FusedSurrogate(tuple(surrogates), resolve_weights(len(surrogates), cfg.ensemble_weights))


def _dispatch(x: np.ndarray, surrogates: Sequence[Surrogate], cfg: AttackConfig) -> np.ndarray:
    if cfg.attacker.uses_transform:
        if len(surrogates) == 1 and cfg.ensemble_weights is None:
            return sta_attack(x, surrogates[0], cfg)
        return ensemble_sta_attack(x, surrogates, cfg)
    handle = _fused(surrogates, cfg)
    if cfg.attacker == AttackerKind.FGSM:
        return fgsm(x, handle, cfg.epsilon)
    return _SIGN_ATTACKERS[cfg.attacker](x, handle, cfg)


def run_attack(x: Waveform | ArrayLike, surrogates: Sequence[Surrogate], cfg: AttackConfig) -> AttackResult:
    """
    Generate one adversarial example.

    Args:
        x (Waveform | ArrayLike): Clean input on the 16-bit sample scale.
        surrogates (Sequence[Surrogate]): White-box handles; more than one runs the
            attacker on the weighted ensemble.
        cfg (AttackConfig): Attacker kind and hyperparameters.

    Returns:
        AttackResult: The float-valued adversarial samples and the measured L-inf norm.

    Raises:
        ConfigError: No surrogates.
        InputTooShortError: Input shorter than one MDCT window or a model's frame.
        InvariantViolation: The result leaves the epsilon-ball or the sample range.
        GradientDivergenceError: A gradient becomes non-finite.
    """
    if not surrogates:
        raise ConfigError("at least one surrogate model is required")
    waveform = x if isinstance(x, Waveform) else Waveform(np.asarray(x, dtype=np.float64))
    min_length = max([cfg.window_length] + [s.model.spec.min_input_length for s in surrogates])
    waveform.validate(min_length)
    samples = waveform.samples

    names = tuple(s.name or s.model.architecture for s in surrogates)
    attacker = cfg.attacker.value
    logger.info(f"[ATTACK] {attacker} on {'+'.join(names)}: {len(samples)} samples, eps={cfg.epsilon}")
    start_time = time.time()
    try:
        adversarial = _dispatch(samples, surrogates, cfg)
        linf = check_ball(adversarial, samples, cfg.epsilon, attacker)
    except StaMdctError as e:
        errors_total.labels(error_type=type(e).__name__, component="attack").inc()
        raise
    duration = time.time() - start_time

    attacks_total.labels(attacker=attacker).inc()
    attack_duration_seconds.labels(attacker=attacker).observe(duration)
    logger.info(f"[ATTACK] {attacker} done in {duration:.2f}s, max|delta| = {linf:g}")
    return AttackResult(
        adversarial=adversarial, attacker=cfg.attacker, surrogates=names, linf=linf, duration=duration
    )
