"""Perturbation size: SNR in dB and per-sample L2 norms."""

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.config import UNIT_SCALE
from sta_mdct.errors import ShapeMismatchError


def _delta(x: Waveform | ArrayLike, x_adv: Waveform | ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    clean, adversarial = as_samples(x), as_samples(x_adv)
    if clean.shape != adversarial.shape:
        raise ShapeMismatchError(f"clean length {clean.shape} != adversarial length {adversarial.shape}")
    return clean, adversarial - clean


def snr(x: Waveform | ArrayLike, x_adv: Waveform | ArrayLike) -> float:
    """
    10 log10(P_x / P_delta) with P the mean squared sample value.

    Returns +inf when the perturbation is zero.
    """
    clean, delta = _delta(x, x_adv)
    p_delta = float(np.mean(delta**2))
    if p_delta == 0.0:
        return float("inf")
    p_x = float(np.mean(clean**2))
    if p_x == 0.0:
        return float("-inf")
    return float(10.0 * np.log10(p_x / p_delta))


def l2_raw(x: Waveform | ArrayLike, x_adv: Waveform | ArrayLike) -> float:
    """||delta||_2 / sqrt(length) on the 16-bit sample scale."""
    _, delta = _delta(x, x_adv)
    return float(np.linalg.norm(delta) / np.sqrt(delta.shape[0]))


def l2(x: Waveform | ArrayLike, x_adv: Waveform | ArrayLike) -> float:
    """Per-sample L2 on the unit scale (16-bit values divided by 32768)."""
    return l2_raw(x, x_adv) / UNIT_SCALE
