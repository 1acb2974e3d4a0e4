import numpy as np
import pytest

from sta_mdct.dsp.features import FRAME_LENGTH, logmel, logmel_backward, logmel_with_cache, mel_filterbank
from sta_mdct.errors import InputTooShortError, ShapeMismatchError
from tests.utils.fixture import gradient_error


def test_logmel_shape_and_normalization(speech_like):
    """25 ms frames at a 10 ms hop; every band has zero mean and unit variance after CMVN."""
    features = logmel(speech_like)

    assert features.values.shape == (1 + (speech_like.shape[0] - 400) // 160, 40)
    assert np.allclose(features.values.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(features.values.std(axis=0), 1.0, atol=1e-6)


def test_pure_tone_lands_in_the_band_around_its_frequency():
    """A 1 kHz tone (DFT bin 32 of 512 at 16 kHz) peaks in the filter that weighs bin 32 most."""
    t = np.arange(16000) / 16000.0
    features = logmel(10000.0 * np.sin(2 * np.pi * 1000.0 * t), normalize=False)
    bank = mel_filterbank(40)

    band = int(np.argmax(features.values.mean(axis=0)))
    assert band == int(np.argmax(bank[:, 32]))
    assert bank[band, 32] > 0.0


def test_mel_filterbank_is_read_only():
    bank = mel_filterbank(40)
    assert bank.shape == (40, 257)
    assert not bank.flags.writeable


@pytest.mark.parametrize("normalize", [True, False])
def test_logmel_backward_matches_finite_differences(speech_like, normalize):
    """The hand-written VJP agrees with central differences on random coordinates."""
    weights = np.random.default_rng(5).normal(size=logmel(speech_like, normalize=normalize).values.shape)
    _, cache = logmel_with_cache(speech_like, normalize=normalize)
    gradient = logmel_backward(weights, cache)

    def f(x):
        return float(np.sum(weights * logmel(x, normalize=normalize).values))

    assert gradient_error(f, gradient, speech_like) < 1e-4


def test_logmel_errors(speech_like):
    with pytest.raises(InputTooShortError):
        logmel(np.zeros(FRAME_LENGTH - 1))

    _, cache = logmel_with_cache(speech_like)
    with pytest.raises(ShapeMismatchError):
        logmel_backward(np.zeros((1, 1)), cache)
