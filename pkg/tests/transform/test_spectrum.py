import numpy as np
import pytest

from sta_mdct.errors import ShapeMismatchError
from sta_mdct.schemas.attack import SpectrumTransformParams, TransformVariant
from sta_mdct.transform.spectrum import (
    TransformSample,
    apply,
    apply_adjoint,
    apply_linear,
    grid_shape,
    sample_transform,
)

MDCT_PARAMS = SpectrumTransformParams(sigma=44.0, rho=0.75, window_length=64)
DCT_PARAMS = SpectrumTransformParams(sigma=44.0, rho=0.75, window_length=64, variant=TransformVariant.DCT)


def test_sample_is_deterministic_per_seed():
    first, again = sample_transform(MDCT_PARAMS, 11, 500), sample_transform(MDCT_PARAMS, 11, 500)
    other = sample_transform(MDCT_PARAMS, 12, 500)

    assert np.array_equal(first.noise, again.noise)
    assert np.array_equal(first.mask, again.mask)
    assert not np.array_equal(first.mask, other.mask)


def test_mask_bounds_and_grid_shape():
    s = sample_transform(MDCT_PARAMS, 0, 500)

    assert s.noise.shape == (500,)
    assert s.mask.shape == grid_shape(MDCT_PARAMS, 500)
    assert s.mask.min() >= 0.25 and s.mask.max() <= 1.75
    assert grid_shape(DCT_PARAMS, 500) == (8, 64)


def test_noise_has_the_configured_deviation():
    noise = sample_transform(MDCT_PARAMS, 21, 1_000_000).noise
    assert abs(noise.std() - 44.0) <= 0.5
    assert abs(noise.mean()) <= 0.5


def test_mask_stream_does_not_depend_on_sigma():
    """Noise is always drawn first, so changing sigma leaves the mask untouched."""
    quiet = SpectrumTransformParams(sigma=1.0, rho=0.75, window_length=64)
    assert np.array_equal(sample_transform(quiet, 5, 300).mask, sample_transform(MDCT_PARAMS, 5, 300).mask)


@pytest.mark.parametrize("variant", [TransformVariant.MDCT, TransformVariant.DCT])
def test_identity_parameters_reconstruct_input(speech_like, variant):
    params = SpectrumTransformParams(sigma=0.0, rho=0.0, window_length=64, variant=variant)
    s = sample_transform(params, 3, speech_like.shape[0])

    assert params.is_identity
    assert np.max(np.abs(apply(speech_like, s, params) - speech_like)) < 1e-6


@pytest.mark.parametrize("params", [MDCT_PARAMS, DCT_PARAMS])
def test_transform_is_affine_in_the_input(speech_like, params):
    """T(x) = T_lin(x) + T_lin(xi) for a fixed sample."""
    s = sample_transform(params, 9, speech_like.shape[0])
    expected = apply_linear(speech_like, s, params) + apply_linear(s.noise, s, params)
    assert np.allclose(apply(speech_like, s, params), expected, atol=1e-6)


@pytest.mark.parametrize("params", [MDCT_PARAMS, DCT_PARAMS])
def test_adjoint_matches_linear_part(rng, params):
    """<T_lin(x), y> == <x, T_lin^T(y)> on random vectors."""
    for trial in range(100):
        length = int(rng.integers(100, 700))
        s = sample_transform(params, trial, length)
        x, y = rng.normal(size=length), rng.normal(size=length)
        lhs = np.dot(apply_linear(x, s, params), y)
        rhs = np.dot(x, apply_adjoint(y, s, params))
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_mismatched_sample_is_rejected(speech_like):
    s = sample_transform(MDCT_PARAMS, 0, speech_like.shape[0])
    with pytest.raises(ShapeMismatchError):
        apply(speech_like[:-10], s, MDCT_PARAMS)
    with pytest.raises(ShapeMismatchError):
        apply_adjoint(speech_like, TransformSample(s.noise, s.mask[:, :-1]), MDCT_PARAMS)
