"""
Differentiable log-mel frontend: Hamming-windowed 25 ms frames at a 10 ms hop,
real DFT magnitude, 40 triangular mel bands over 0-8 kHz, log and per-utterance
CMVN. `logmel_backward` is the exact vector-Jacobian product of `logmel`.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import librosa
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.config import SAMPLE_RATE
from sta_mdct.dsp.export import write_grid_csv
from sta_mdct.dsp.windows import hamming_window
from sta_mdct.errors import InputTooShortError, ShapeMismatchError

logger = logging.getLogger(__name__)

FRAME_LENGTH = 400  # 25 ms
FRAME_HOP = 160  # 10 ms
N_FFT = 512
N_MELS = 40
LOG_FLOOR = 1e-6
VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class FeatureMap:
    """Frames x mel-bands grid."""

    values: np.ndarray
    normalized: bool = True

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_bands(self) -> int:
        return int(self.values.shape[1])

    def to_csv(self, path: Path | str) -> None:
        write_grid_csv(self.values, path)


@dataclass(frozen=True)
class LogmelCache:
    """Intermediates of one forward pass, consumed by `logmel_backward`."""

    length: int
    spectrum: np.ndarray  # complex rfft, (T, N_FFT/2 + 1)
    magnitude: np.ndarray
    mel: np.ndarray
    normalized: np.ndarray | None
    std: np.ndarray | None
    floored: np.ndarray | None


@lru_cache(maxsize=4)
def mel_filterbank(n_mels: int = N_MELS) -> np.ndarray:
    """HTK-style triangular filters, shape (n_mels, N_FFT/2 + 1), unnormalized."""
    bank = librosa.filters.mel(
        sr=SAMPLE_RATE,
        n_fft=N_FFT,
        n_mels=n_mels,
        fmin=0.0,
        fmax=SAMPLE_RATE / 2,
        htk=True,
        norm=None,
        dtype=np.float64,
    )
    bank.setflags(write=False)
    return bank


def n_feature_frames(length: int) -> int:
    if length < FRAME_LENGTH:
        raise InputTooShortError(f"log-mel needs at least {FRAME_LENGTH} samples, got {length}")
    return 1 + (length - FRAME_LENGTH) // FRAME_HOP


def _frame_index(length: int) -> np.ndarray:
    starts = np.arange(n_feature_frames(length)) * FRAME_HOP
    return starts[:, None] + np.arange(FRAME_LENGTH)


def logmel_with_cache(
    w: Waveform | ArrayLike, n_mels: int = N_MELS, normalize: bool = True
) -> tuple[FeatureMap, LogmelCache]:
    """
    Compute log-mel features and keep what the backward pass needs.

    Args:
        w (Waveform | ArrayLike): Input samples (16-bit scale).
        n_mels (int): Number of mel bands.
        normalize (bool): Apply CMVN; False returns the raw log energies.

    Returns:
        tuple[FeatureMap, LogmelCache]: Features and backward cache.

    Raises:
        InputTooShortError: Fewer samples than one 25 ms frame.
    """
    samples = as_samples(w)
    n_frames = n_feature_frames(samples.shape[0])
    frames = sliding_window_view(samples, FRAME_LENGTH)[::FRAME_HOP][:n_frames]
    spectrum = sp_fft.rfft(frames * hamming_window(FRAME_LENGTH).coefficients, n=N_FFT, axis=1)
    magnitude = np.abs(spectrum)
    mel = magnitude @ mel_filterbank(n_mels).T
    log_mel = np.log(mel + LOG_FLOOR)

    if not normalize:
        cache = LogmelCache(samples.shape[0], spectrum, magnitude, mel, None, None, None)
        return FeatureMap(log_mel, normalized=False), cache

    mean = log_mel.mean(axis=0)
    variance = ((log_mel - mean) ** 2).mean(axis=0)
    floored = variance < VARIANCE_FLOOR
    std = np.sqrt(np.maximum(variance, VARIANCE_FLOOR))
    normalized = (log_mel - mean) / std
    cache = LogmelCache(samples.shape[0], spectrum, magnitude, mel, normalized, std, floored)
    return FeatureMap(normalized, normalized=True), cache


def logmel(w: Waveform | ArrayLike, n_mels: int = N_MELS, normalize: bool = True) -> FeatureMap:
    return logmel_with_cache(w, n_mels, normalize)[0]


def logmel_backward(d_features: np.ndarray, cache: LogmelCache) -> np.ndarray:
    """
    Pull a feature-space gradient back to the waveform.

    Args:
        d_features (np.ndarray): Gradient w.r.t. the (T, n_mels) feature grid.
        cache (LogmelCache): Cache from the matching forward pass.

    Returns:
        np.ndarray: Gradient w.r.t. the input samples.

    Raises:
        ShapeMismatchError: Gradient grid does not match the cached forward pass.
    """
    if d_features.shape != cache.mel.shape:
        raise ShapeMismatchError(f"feature gradient {d_features.shape} != forward grid {cache.mel.shape}")

    if cache.normalized is None:
        d_log = d_features
    else:
        n = d_features.shape[0]
        d_centered = d_features - d_features.mean(axis=0)
        # Where the variance was floored the scale is a constant
        correction = cache.normalized * (d_features * cache.normalized).sum(axis=0) / n
        d_log = np.where(cache.floored, d_centered, d_centered - correction) / cache.std

    d_mel = d_log / (cache.mel + LOG_FLOOR)
    d_magnitude = d_mel @ mel_filterbank(cache.mel.shape[1])
    safe = np.where(cache.magnitude > 0, cache.magnitude, 1.0)
    d_spectrum = np.where(cache.magnitude > 0, d_magnitude / safe, 0.0) * cache.spectrum

    # Transpose of rfft(n=N_FFT) restricted to the first FRAME_LENGTH inputs
    d_spectrum[:, 1:-1] *= 0.5
    d_windowed = N_FFT * sp_fft.irfft(d_spectrum, n=N_FFT, axis=1)[:, :FRAME_LENGTH]
    d_frames = d_windowed * hamming_window(FRAME_LENGTH).coefficients

    d_samples = np.zeros(cache.length)
    np.add.at(d_samples, _frame_index(cache.length), d_frames)
    return d_samples
