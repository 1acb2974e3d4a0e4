"""
Stochastic spectrum transformation T(x) = iMDCT(MDCT(x + xi) * M) and its transpose.

A TransformSample fixes (xi, M); given a sample, T is affine in x, so the gradient of
L(T(x)) w.r.t. x is the transpose of the linear part applied to the gradient at T(x).
"""

import logging
from dataclasses import dataclass

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.dsp.dct import dct_adjoint, dct_frames, idct_adjoint, idct_frames
from sta_mdct.dsp.mdct import frame_count, imdct, imdct_adjoint, mdct, mdct_adjoint
from sta_mdct.errors import ShapeMismatchError
from sta_mdct.schemas.attack import SpectrumTransformParams, TransformVariant
from sta_mdct.utils.seeding import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformSample:
    """One draw of the additive noise xi (sample domain) and the mask M (frame grid)."""

    noise: np.ndarray
    mask: np.ndarray

    @property
    def length(self) -> int:
        return int(self.noise.shape[0])


def grid_shape(params: SpectrumTransformParams, input_length: int) -> tuple[int, int]:
    """Coefficient grid (frames, bins) of a signal of `input_length` samples."""
    w = params.window_length
    if params.variant == TransformVariant.DCT:
        return -(-input_length // w), w
    return frame_count(input_length, w), w // 2


def sample_transform(params: SpectrumTransformParams, rng_seed: int, input_length: int) -> TransformSample:
    """
    Draw xi ~ N(0, sigma^2 I) and M ~ U(1 - rho, 1 + rho) from an explicitly seeded RNG.

    Noise is drawn before the mask, always, so the mask stream does not depend on sigma.

    Args:
        params (SpectrumTransformParams): Transform parameters.
        rng_seed (int): Seed; equal seeds give identical samples.
        input_length (int): Signal length the sample is drawn for.

    Returns:
        TransformSample: Noise of shape (input_length,), mask of the frame-grid shape.
    """
    rng = make_rng(rng_seed)
    noise = rng.normal(0.0, params.sigma, input_length)
    mask = rng.uniform(1.0 - params.rho, 1.0 + params.rho, grid_shape(params, input_length))
    return TransformSample(noise=noise, mask=mask)


def _check(samples: np.ndarray, s: TransformSample, params: SpectrumTransformParams) -> None:
    if samples.shape[0] != s.length:
        raise ShapeMismatchError(f"input of {samples.shape[0]} samples, transform sample drawn for {s.length}")
    expected = grid_shape(params, s.length)
    if s.mask.shape != expected:
        raise ShapeMismatchError(f"mask shape {s.mask.shape} != frame grid {expected}")


def _masked_roundtrip(samples: np.ndarray, mask: np.ndarray, params: SpectrumTransformParams) -> np.ndarray:
    if params.variant == TransformVariant.DCT:
        frames = dct_frames(samples, params.window_length)
        return idct_frames(frames.with_coefficients(frames.coefficients * mask))
    frames = mdct(samples, params.window())
    return imdct(frames.with_coefficients(frames.coefficients * mask))


def apply(x: Waveform | ArrayLike, s: TransformSample, params: SpectrumTransformParams) -> np.ndarray:
    """T(x) = inverse(forward(x + xi) * M). The output is not clamped."""
    samples = as_samples(x)
    _check(samples, s, params)
    return _masked_roundtrip(samples + s.noise, s.mask, params)


def apply_linear(x: Waveform | ArrayLike, s: TransformSample, params: SpectrumTransformParams) -> np.ndarray:
    """Linear part of T: the same pipeline without the additive noise."""
    samples = as_samples(x)
    _check(samples, s, params)
    return _masked_roundtrip(samples, s.mask, params)


def apply_adjoint(g: Waveform | ArrayLike, s: TransformSample, params: SpectrumTransformParams) -> np.ndarray:
    """
    Transpose of the linear part of T, applied to a sample-domain gradient.

    Args:
        g (Waveform | ArrayLike): Gradient w.r.t. T(x).
        s (TransformSample): The sample used in the forward pass.
        params (SpectrumTransformParams): Transform parameters.

    Returns:
        np.ndarray: Gradient w.r.t. x.

    Raises:
        ShapeMismatchError: Gradient length or mask shape does not match the sample.
    """
    gradient = as_samples(g)
    _check(gradient, s, params)
    if params.variant == TransformVariant.DCT:
        grid = idct_adjoint(gradient, params.window_length)
        return dct_adjoint(grid.with_coefficients(grid.coefficients * s.mask))
    grid = imdct_adjoint(gradient, params.window())
    return mdct_adjoint(grid.with_coefficients(grid.coefficients * s.mask))
