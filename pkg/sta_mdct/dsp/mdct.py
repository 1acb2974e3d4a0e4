"""
Direct-kernel MDCT/iMDCT with time-domain aliasing cancellation.

Signals are reflect-padded by W/2 samples on both ends (plus a zero tail so the
padded length is a whole number of hops), framed at hop W/2, windowed and projected
onto the cosine kernel. The inverse applies the same window, overlap-adds and crops
the padding. Both directions are linear, and their exact transposes are provided so
gradients can be pulled back through a transform pipeline.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.dsp.export import write_grid_csv
from sta_mdct.dsp.windows import Window, kbd_window
from sta_mdct.errors import InputTooShortError, ShapeMismatchError

logger = logging.getLogger(__name__)

MDCT = "mdct"
DCT = "dct"


@dataclass(frozen=True)
class SpectrumFrames:
    """Coefficient grid (frames x bins) plus what is needed to invert it."""

    coefficients: np.ndarray
    window: Window
    length: int
    kind: str = MDCT

    @property
    def hop(self) -> int:
        return self.window.half if self.kind == MDCT else self.window.length

    @property
    def n_frames(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def n_bins(self) -> int:
        return int(self.coefficients.shape[1])

    def with_coefficients(self, coefficients: np.ndarray) -> "SpectrumFrames":
        """Same grid geometry, new values (e.g. after masking)."""
        if coefficients.shape != self.coefficients.shape:
            raise ShapeMismatchError(f"coefficient grid {coefficients.shape} != {self.coefficients.shape}")
        return SpectrumFrames(coefficients, self.window, self.length, self.kind)

    def to_csv(self, path: Path | str) -> None:
        write_grid_csv(self.coefficients, path)


@lru_cache(maxsize=8)
def mdct_kernel(window_length: int) -> np.ndarray:
    """
    Cosine kernel C[k, n] = cos(pi * (2n + 1 + W/2) * (2k + 1) / (2W)).

    Args:
        window_length (int): W.

    Returns:
        np.ndarray: Read-only (W/2, W) matrix.
    """
    half = window_length // 2
    n = np.arange(window_length)
    k = np.arange(half)
    kernel = np.cos(np.pi * np.outer(2 * k + 1, 2 * n + 1 + half) / (2 * window_length))
    kernel.setflags(write=False)
    return kernel


def inverse_scale(window_length: int) -> float:
    """Analytic iMDCT scaling constant for a Princen-Bradley window (2/W)."""
    return 2.0 / window_length


@lru_cache(maxsize=64)
def _padding_map(length: int, window_length: int) -> np.ndarray:
    """Index of the source sample for every padded position; -1 marks zero fill."""
    half = window_length // 2
    if length <= half:
        raise InputTooShortError(f"signal of {length} samples is too short for reflect padding by {half}")
    index = np.pad(np.arange(length), half, mode="reflect")
    tail = (-length) % half
    if tail:
        index = np.concatenate([index, np.full(tail, -1)])
    index.setflags(write=False)
    return index


def _pad(samples: np.ndarray, window_length: int) -> np.ndarray:
    index = _padding_map(samples.shape[0], window_length)
    padded = np.zeros(index.shape[0])
    valid = index >= 0
    padded[valid] = samples[index[valid]]
    return padded


def _pad_adjoint(padded: np.ndarray, length: int, window_length: int) -> np.ndarray:
    index = _padding_map(length, window_length)
    valid = index >= 0
    out = np.zeros(length)
    np.add.at(out, index[valid], padded[valid])
    return out


def _frame(padded: np.ndarray, window_length: int) -> np.ndarray:
    return sliding_window_view(padded, window_length)[:: window_length // 2]


def _overlap_add(frames: np.ndarray, window_length: int) -> np.ndarray:
    half = window_length // 2
    n_frames = frames.shape[0]
    out = np.zeros((n_frames + 1) * half)
    # Two half-frame streams: first halves land on hops f, second halves on f + 1
    out[: n_frames * half] += frames[:, :half].reshape(-1)
    out[half:] += frames[:, half:].reshape(-1)
    return out


def padded_length(length: int, window_length: int) -> int:
    return int(_padding_map(length, window_length).shape[0])


def frame_count(length: int, window_length: int) -> int:
    """Number of MDCT frames produced for a signal of `length` samples."""
    return (padded_length(length, window_length) - window_length) // (window_length // 2) + 1


def mdct(w: Waveform | ArrayLike, window: Window | None = None) -> SpectrumFrames:
    """
    Forward MDCT of a whole signal.

    Args:
        w (Waveform | ArrayLike): Input samples.
        window (Window | None): Analysis window; defaults to the configured KBD window.

    Returns:
        SpectrumFrames: Grid of shape (frames, W/2).

    Raises:
        InputTooShortError: Signal shorter than W/2 + 1 samples.
    """
    window = window or kbd_window()
    samples = as_samples(w)
    frames = _frame(_pad(samples, window.length), window.length)
    coefficients = (frames * window.coefficients) @ mdct_kernel(window.length).T
    return SpectrumFrames(coefficients, window, int(samples.shape[0]), MDCT)


def imdct(s: SpectrumFrames, scale: float | None = None) -> np.ndarray:
    """
    Inverse MDCT: per-frame synthesis, windowing, overlap-add and crop.

    Args:
        s (SpectrumFrames): Grid produced by `mdct` (or a masked copy of one).
        scale (float | None): Synthesis constant; defaults to 2/W.

    Returns:
        np.ndarray: Reconstructed samples of the original length.

    Raises:
        ShapeMismatchError: Bin count differs from W/2 or frame count from the signal length.
    """
    window = s.window
    _check_grid(s)
    c = inverse_scale(window.length) if scale is None else scale
    frames = c * window.coefficients * (s.coefficients @ mdct_kernel(window.length))
    signal = _overlap_add(frames, window.length)
    return signal[window.half : window.half + s.length]


def mdct_adjoint(g: SpectrumFrames) -> np.ndarray:
    """Transpose of `mdct`: maps a coefficient-grid gradient back to samples."""
    window = g.window
    _check_grid(g)
    frames = window.coefficients * (g.coefficients @ mdct_kernel(window.length))
    return _pad_adjoint(_overlap_add(frames, window.length), g.length, window.length)


def imdct_adjoint(g: Waveform | ArrayLike, window: Window | None = None, scale: float | None = None) -> SpectrumFrames:
    """Transpose of `imdct`: maps a sample-domain gradient onto the coefficient grid."""
    window = window or kbd_window()
    samples = as_samples(g)
    length = int(samples.shape[0])
    embedded = np.zeros(padded_length(length, window.length))
    embedded[window.half : window.half + length] = samples
    c = inverse_scale(window.length) if scale is None else scale
    frames = _frame(embedded, window.length) * (c * window.coefficients)
    return SpectrumFrames(frames @ mdct_kernel(window.length).T, window, length, MDCT)


def calibrate_inverse_scale(window: Window, length: int | None = None) -> float:
    """
    Least-squares fit of the synthesis constant on an impulse.

    Runs an unscaled iMDCT of the MDCT of a unit impulse and returns the c that best
    maps it back onto the impulse. For a Princen-Bradley window this equals 2/W.

    Args:
        window (Window): Window to calibrate.
        length (int | None): Length of the test signal; defaults to 2W.

    Returns:
        float: Calibrated constant.
    """
    length = length or 2 * window.length
    impulse = np.zeros(length)
    impulse[length // 2] = 1.0
    unscaled = imdct(mdct(impulse, window), scale=1.0)
    c = float(np.dot(unscaled, impulse) / np.dot(unscaled, unscaled))
    logger.debug(f"Calibrated iMDCT scale for W={window.length}: {c:.12g} (analytic {inverse_scale(window.length)})")
    return c


def _check_grid(s: SpectrumFrames) -> None:
    if s.kind != MDCT:
        raise ShapeMismatchError(f"expected MDCT frames, got {s.kind}")
    if s.n_bins != s.window.half:
        raise ShapeMismatchError(f"bin count {s.n_bins} != W/2 = {s.window.half}")
    expected = frame_count(s.length, s.window.length)
    if s.n_frames != expected:
        raise ShapeMismatchError(f"frame count {s.n_frames} != {expected} for a {s.length}-sample signal")
