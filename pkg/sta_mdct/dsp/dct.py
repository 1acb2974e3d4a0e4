"""Orthonormal block DCT-II over non-overlapping frames (the STA-DCT comparison variant)."""

import numpy as np
from scipy import fft as sp_fft

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.config import MDCT_WINDOW
from sta_mdct.dsp.mdct import DCT, SpectrumFrames
from sta_mdct.dsp.windows import rectangular_window
from sta_mdct.errors import ShapeMismatchError


def _n_frames(length: int, frame_length: int) -> int:
    return -(-length // frame_length)


def dct_frames(w: Waveform | ArrayLike, frame_length: int = MDCT_WINDOW) -> SpectrumFrames:
    """
    Zero-pad the tail to a whole number of frames and DCT-II each frame.

    Args:
        w (Waveform | ArrayLike): Input samples.
        frame_length (int): Frame size W.

    Returns:
        SpectrumFrames: Grid of shape (frames, W) with kind "dct".
    """
    samples = as_samples(w)
    length = int(samples.shape[0])
    padded = np.zeros(_n_frames(length, frame_length) * frame_length)
    padded[:length] = samples
    coefficients = sp_fft.dct(padded.reshape(-1, frame_length), type=2, norm="ortho", axis=1)
    return SpectrumFrames(coefficients, rectangular_window(frame_length), length, DCT)


def idct_frames(s: SpectrumFrames) -> np.ndarray:
    """DCT-III of every frame, concatenated and cropped to the original length."""
    frame_length = s.window.length
    if s.kind != DCT or s.n_bins != frame_length or s.n_frames != _n_frames(s.length, frame_length):
        raise ShapeMismatchError(
            f"grid {s.coefficients.shape} ({s.kind}) does not match a {s.length}-sample DCT of frame {frame_length}"
        )
    frames = sp_fft.idct(s.coefficients, type=2, norm="ortho", axis=1)
    return frames.reshape(-1)[: s.length]


def dct_adjoint(g: SpectrumFrames) -> np.ndarray:
    # Orthonormal: the transpose of the framed DCT is the cropped inverse
    return idct_frames(g)


def idct_adjoint(g: Waveform | ArrayLike, frame_length: int = MDCT_WINDOW) -> SpectrumFrames:
    return dct_frames(g, frame_length)
