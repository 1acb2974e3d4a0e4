"""
Layer-CAM saliency over a convolutional feature map.

For speaker c with enrollment profile e_c the class score is y^c = <e_c, f(x)>. With
A^k the k-th channel of the chosen layer's output:

    w^k_ij = relu(dy^c / dA^k_ij)
    Z_ij   = relu(sum_k w^k_ij * A^k_ij)
    Z_hat  = (Z - min Z) / (max Z - min Z)      (all zeros when Z is constant)

Grids are (time, frequency).
"""

import logging
from dataclasses import dataclass

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform
from sta_mdct.errors import ModelFormatError, ShapeMismatchError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.nets.speakers import SpeakerProfile, score

logger = logging.getLogger(__name__)

LAST_CONV = "last-conv"


@dataclass(frozen=True)
class SaliencyMap:
    """Raw grid Z, normalized grid Z_hat and what they were computed for."""

    raw: np.ndarray
    normalized: np.ndarray
    layer: str
    speaker_id: str
    score: float

    @property
    def shape(self) -> tuple[int, ...]:
        return self.normalized.shape


def min_max_normalize(z: np.ndarray) -> np.ndarray:
    """Map Z onto [0, 1]; a constant grid maps to all zeros."""
    low, high = float(z.min()), float(z.max())
    if high <= low:
        return np.zeros_like(z)
    return (z - low) / (high - low)


def layer_cam_from_activations(activations: np.ndarray, gradients: np.ndarray) -> np.ndarray:
    """
    Layer-CAM grid from (K, T, F) activations and their score gradients.

    Raises:
        ShapeMismatchError: Shapes differ or are not 3-D.
    """
    if activations.shape != gradients.shape or activations.ndim != 3:
        raise ShapeMismatchError(f"activations {activations.shape} and gradients {gradients.shape} must be (K, T, F)")
    weights = np.maximum(gradients, 0.0)
    return np.maximum((weights * activations).sum(axis=0), 0.0)


def resolve_layer(model: EmbeddingModel, layer: str | None) -> str:
    """Default to the final convolutional layer; reject anything non-convolutional."""
    if layer is None or layer == LAST_CONV:
        name = model.last_conv
        if name is None:
            raise ModelFormatError(f"{model.architecture} has no convolutional layer")
        return name
    if not model.layers[model.layer_index(layer)].convolutional:
        raise ModelFormatError(f"layer '{layer}' of {model.architecture} is not convolutional")
    return layer


def layer_cam(
    model: EmbeddingModel, x: Waveform | ArrayLike, profile: SpeakerProfile, layer: str | None = None
) -> SaliencyMap:
    """
    Compute the Layer-CAM map of `x` for one enrolled speaker.

    Args:
        model (EmbeddingModel): Model with at least one convolutional layer.
        x (Waveform | ArrayLike): Input samples.
        profile (SpeakerProfile): Enrollment of the speaker the score is taken for.
        layer (str | None): Layer name; None or "last-conv" picks the final conv layer.

    Returns:
        SaliencyMap: Z and Z_hat over the layer's (time, frequency) extent.

    Raises:
        ModelFormatError: Unknown or non-convolutional layer.
    """
    name = resolve_layer(model, layer)
    embedding, cache = model.forward(x)
    y = score(profile, embedding)
    activations = cache.outputs[name]
    gradients = model.layer_gradient(cache, profile.embedding, name)
    raw = layer_cam_from_activations(activations, gradients)
    logger.debug(f"[SALIENCY] {model.architecture}/{name} for {profile.speaker_id}: score={y:.4f} grid={raw.shape}")
    return SaliencyMap(raw=raw, normalized=min_max_normalize(raw), layer=name, speaker_id=profile.speaker_id, score=y)


def saliency_shift(a: SaliencyMap | np.ndarray, b: SaliencyMap | np.ndarray) -> float:
    """
    1 - cosine similarity of two normalized maps.

    0 means identical attention and 1 disjoint support. Two all-zero maps count as
    identical; one all-zero map against a non-zero one counts as disjoint.

    Raises:
        ShapeMismatchError: Grids differ in shape.
    """
    za = (a.normalized if isinstance(a, SaliencyMap) else np.asarray(a, dtype=np.float64)).ravel()
    zb = (b.normalized if isinstance(b, SaliencyMap) else np.asarray(b, dtype=np.float64)).ravel()
    if za.shape != zb.shape:
        raise ShapeMismatchError(f"saliency grids differ: {za.shape} vs {zb.shape}")
    na, nb = float(np.linalg.norm(za)), float(np.linalg.norm(zb))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    cosine = float(np.dot(za, zb)) / (na * nb)
    return float(np.clip(1.0 - cosine, 0.0, 1.0))
