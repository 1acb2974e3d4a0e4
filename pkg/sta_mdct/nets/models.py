"""
Embedding models: an ordered layer stack over one flat parameter vector.

Two architectures are provided:

- convnet-a: log-mel frontend, conv 3x3 (8 ch) + ReLU, conv 3x3 (16 ch) + ReLU,
  flatten over time, mean/std statistics pooling, linear head, L2 normalization.
- framenet-b: raw-sample frames, dense + ReLU, dense + ReLU, statistics pooling,
  linear head, L2 normalization.

Models are immutable; every forward pass returns its own ActivationCache, which the
backward passes consume.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform, as_samples
from sta_mdct.errors import ModelFormatError, ShapeMismatchError
from sta_mdct.nets.frontends import FrameFrontend, LogMelFrontend
from sta_mdct.nets.layers import Conv2d, Dense, Flatten, L2Normalize, Layer, Params, StatsPool
from sta_mdct.schemas.model import ModelSpec
from sta_mdct.utils.seeding import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ActivationCache:
    """Per-layer inputs, outputs and backward contexts of one forward pass."""

    model_id: int
    input_length: int
    start: int
    inputs: dict[str, np.ndarray]
    outputs: dict[str, np.ndarray]
    contexts: list[Any] = field(repr=False)

    @property
    def embedding(self) -> np.ndarray:
        return next(reversed(self.outputs.values()))


class EmbeddingModel:
    """A differentiable waveform -> unit-norm embedding network."""

    def __init__(self, spec: ModelSpec, layers: list[Layer], params: np.ndarray):
        self.spec = spec
        self.layers = layers
        self._layout: list[dict[str, tuple[slice, tuple[int, ...]]]] = []
        offset = 0
        for layer in layers:
            entries = {}
            for name, shape in layer.param_shapes().items():
                size = int(np.prod(shape))
                entries[name] = (slice(offset, offset + size), shape)
                offset += size
            self._layout.append(entries)
        self.n_params = offset

        params = np.array(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ModelFormatError(f"{spec.architecture}: expected {self.n_params} parameters, got {params.shape}")
        params.setflags(write=False)
        self.params = params
        self._views = self.views(params)

    @property
    def architecture(self) -> str:
        return self.spec.architecture

    @property
    def embedding_dim(self) -> int:
        return self.spec.embedding_dim

    @property
    def layer_names(self) -> list[str]:
        return [layer.name for layer in self.layers]

    def layer_index(self, name: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.name == name:
                return i
        raise ModelFormatError(f"{self.architecture} has no layer named '{name}' (layers: {self.layer_names})")

    @property
    def last_conv(self) -> str | None:
        """Name of the final convolutional layer, if the architecture has one."""
        convs = [layer.name for layer in self.layers if layer.convolutional]
        return convs[-1] if convs else None

    def views(self, flat: np.ndarray) -> list[Params]:
        """Named per-layer views into a flat parameter (or gradient) vector."""
        return [{name: flat[sl].reshape(shape) for name, (sl, shape) in entries.items()} for entries in self._layout]

    def with_params(self, params: np.ndarray) -> "EmbeddingModel":
        return EmbeddingModel(self.spec, self.layers, params)

    def forward(self, w: Waveform | ArrayLike) -> tuple[np.ndarray, ActivationCache]:
        """
        Embed a waveform.

        Args:
            w (Waveform | ArrayLike): Samples on the 16-bit scale.

        Returns:
            tuple[np.ndarray, ActivationCache]: Unit-norm embedding and the activation cache.

        Raises:
            InputTooShortError: Input shorter than the frontend's first frame.
        """
        samples = as_samples(w)
        return self.forward_from(samples, start=0)

    def forward_from(self, x: np.ndarray, start: int = 0) -> tuple[np.ndarray, ActivationCache]:
        """Run layers[start:] on `x` (e.g. a precomputed frontend output when start=1)."""
        inputs: dict[str, np.ndarray] = {}
        outputs: dict[str, np.ndarray] = {}
        contexts: list[Any] = []
        for layer, params in zip(self.layers[start:], self._views[start:], strict=True):
            inputs[layer.name] = x
            x, ctx = layer.forward(x, params)
            outputs[layer.name] = x
            contexts.append(ctx)
        length = int(next(iter(inputs.values())).shape[0])
        return x, ActivationCache(id(self), length, start, inputs, outputs, contexts)

    def frontend(self, w: Waveform | ArrayLike) -> np.ndarray:
        """Output of the parameter-free first layer."""
        return self.layers[0].forward(as_samples(w), self._views[0])[0]

    def backward(
        self, cache: ActivationCache, upstream: np.ndarray, stop: int | None = None, with_params: bool = False
    ) -> tuple[np.ndarray, np.ndarray | None]:
        """
        Backpropagate an embedding-space gradient.

        Args:
            cache (ActivationCache): Cache of the matching forward pass.
            upstream (np.ndarray): dL/d(embedding).
            stop (int | None): Stop after back-propagating through layers[stop]; the
                returned gradient is then w.r.t. that layer's input. Defaults to the
                first layer the cache covers.
            with_params (bool): Also accumulate the flat parameter gradient.

        Returns:
            tuple[np.ndarray, np.ndarray | None]: Input gradient and (optionally) flat parameter gradient.

        Raises:
            ShapeMismatchError: Cache from another model or upstream of the wrong dimension.
        """
        if cache.model_id != id(self):
            raise ShapeMismatchError("activation cache was produced by a different model")
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != (self.embedding_dim,):
            raise ShapeMismatchError(f"upstream gradient {upstream.shape} != ({self.embedding_dim},)")
        stop = cache.start if stop is None else stop

        flat_grad = np.zeros(self.n_params) if with_params else None
        grad_views = self.views(flat_grad) if flat_grad is not None else None
        dx = upstream
        for i in range(len(self.layers) - 1, stop - 1, -1):
            layer = self.layers[i]
            dx, grads = layer.backward(dx, cache.contexts[i - cache.start], self._views[i])
            if grad_views is not None:
                for name, g in grads.items():
                    grad_views[i][name][...] = g
        return dx, flat_grad

    def input_gradient(self, cache: ActivationCache, upstream: np.ndarray) -> np.ndarray:
        """Exact gradient w.r.t. the raw samples of the cached forward pass."""
        if cache.start != 0:
            raise ShapeMismatchError("input gradient needs a cache of a full forward pass")
        return self.backward(cache, upstream)[0]

    def layer_gradient(self, cache: ActivationCache, upstream: np.ndarray, layer: str) -> np.ndarray:
        """Gradient w.r.t. the output of `layer`."""
        index = self.layer_index(layer)
        return self.backward(cache, upstream, stop=index + 1)[0]


def _convnet_layers(spec: ModelSpec) -> list[Layer]:
    c1, c2 = spec.conv_channels
    return [
        LogMelFrontend("logmel", spec.n_mels),
        Conv2d("conv1", 1, c1),
        Conv2d("conv2", c1, c2),
        Flatten("flatten"),
        StatsPool("pool"),
        Dense("embedding", 2 * c2 * spec.n_mels, spec.embedding_dim),
        L2Normalize("l2norm"),
    ]


def _framenet_layers(spec: ModelSpec) -> list[Layer]:
    return [
        FrameFrontend("frames", spec.frame_length, spec.frame_hop, spec.input_scale),
        Dense("dense1", spec.frame_length, spec.hidden_dim, relu=True),
        Dense("dense2", spec.hidden_dim, spec.hidden_dim, relu=True),
        StatsPool("pool"),
        Dense("embedding", 2 * spec.hidden_dim, spec.embedding_dim),
        L2Normalize("l2norm"),
    ]


def build_layers(spec: ModelSpec) -> list[Layer]:
    if spec.architecture == "convnet-a":
        return _convnet_layers(spec)
    return _framenet_layers(spec)


def init_params(layers: list[Layer], seed: int) -> np.ndarray:
    """He-normal weights, zero biases, drawn in layer order from one seeded stream."""
    rng = make_rng(seed)
    chunks = []
    for layer in layers:
        for name, shape in layer.param_shapes().items():
            if name == "bias":
                chunks.append(np.zeros(shape).ravel())
            else:
                chunks.append(rng.normal(0.0, np.sqrt(2.0 / layer.fan_in()), shape).ravel())
    return np.concatenate(chunks) if chunks else np.zeros(0)


def build_model(spec: ModelSpec, seed: int = 0, params: np.ndarray | None = None) -> EmbeddingModel:
    """
    Instantiate an architecture, randomly initialized unless `params` is given.

    Args:
        spec (ModelSpec): Architecture hyperparameters.
        seed (int): Initialization seed.
        params (np.ndarray | None): Flat parameter vector to load instead.

    Returns:
        EmbeddingModel: The model.
    """
    layers = build_layers(spec)
    if params is None:
        params = init_params(layers, seed)
    model = EmbeddingModel(spec, layers, params)
    logger.debug(f"Built {spec.architecture} with {model.n_params} parameters")
    return model
