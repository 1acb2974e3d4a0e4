import numpy as np
import pytest

from sta_mdct.errors import ModelFormatError, ShapeMismatchError
from sta_mdct.saliency.layer_cam import (
    LAST_CONV,
    layer_cam,
    layer_cam_from_activations,
    min_max_normalize,
    resolve_layer,
    saliency_shift,
)

ACTIVATIONS = np.array([[[1.0, 2.0], [3.0, 4.0]], [[0.0, 1.0], [1.0, 0.0]]])
GRADIENTS = np.array([[[1.0, -1.0], [0.5, 2.0]], [[-1.0, 3.0], [2.0, 0.0]]])


def test_layer_cam_hand_computed_grid():
    """Negative gradients are dropped before weighting; the grid is then min-max scaled."""
    raw = layer_cam_from_activations(ACTIVATIONS, GRADIENTS)

    assert raw.tolist() == [[1.0, 3.0], [3.5, 8.0]]
    assert np.allclose(min_max_normalize(raw), [[0.0, 2 / 7], [2.5 / 7, 1.0]])


def test_constant_grid_normalizes_to_zeros():
    assert min_max_normalize(np.full((3, 2), 4.0)).tolist() == [[0.0, 0.0]] * 3


def test_layer_cam_on_convnet(convnet, profiles, speech_like):
    saliency = layer_cam(convnet, speech_like, profiles[0])
    _, cache = convnet.forward(speech_like)

    assert saliency.layer == "conv2"
    assert saliency.shape == cache.outputs["conv2"].shape[1:]
    assert saliency.normalized.min() >= 0.0 and saliency.normalized.max() <= 1.0
    assert saliency.score == pytest.approx(float(np.dot(profiles[0].embedding, cache.embedding)))
    assert layer_cam(convnet, speech_like, profiles[0], layer="conv1").layer == "conv1"


def test_layer_resolution(convnet, framenet):
    assert resolve_layer(convnet, LAST_CONV) == "conv2"
    with pytest.raises(ModelFormatError):
        resolve_layer(convnet, "embedding")
    with pytest.raises(ModelFormatError):
        resolve_layer(framenet, None)


def test_saliency_shift():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([[0.0, 1.0], [0.0, 0.0]])
    zeros = np.zeros((2, 2))

    assert saliency_shift(a, a) == pytest.approx(0.0)
    assert saliency_shift(a, b) == pytest.approx(1.0)
    assert saliency_shift(a, a + b) == pytest.approx(1 - 1 / np.sqrt(2))
    assert saliency_shift(zeros, zeros) == 0.0
    assert saliency_shift(zeros, a) == 1.0
    with pytest.raises(ShapeMismatchError):
        saliency_shift(a, np.zeros(3))
    with pytest.raises(ShapeMismatchError):
        layer_cam_from_activations(ACTIVATIONS, GRADIENTS[:1])
