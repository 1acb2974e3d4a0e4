"""
Layers with explicit forward/backward passes.

Every layer maps an input tensor and its parameter views to an output plus a context;
`backward` takes the output gradient and that context and returns the input gradient
and per-parameter gradients. Layers hold no state of their own, so one model can be
evaluated concurrently from several threads.
"""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from sta_mdct.errors import ShapeMismatchError

Params = dict[str, np.ndarray]
Grads = dict[str, np.ndarray]

STD_FLOOR = 1e-8
NORM_FLOOR = 1e-12


class Layer(ABC):
    """One named stage of an embedding network."""

    convolutional = False

    def __init__(self, name: str):
        self.name = name

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {}

    def fan_in(self) -> int:
        return 1

    @abstractmethod
    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        """Return (output, context)."""

    @abstractmethod
    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        """Return (input gradient, parameter gradients)."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class Conv2d(Layer):
    """
    3x3 'same' convolution over a (channels, time, frequency) map, optionally with ReLU.

    Implemented as im2col + matmul; the ReLU is fused so the registered output is the
    post-activation feature map A^k.
    """

    convolutional = True

    def __init__(self, name: str, in_channels: int, out_channels: int, kernel: int = 3, relu: bool = True):
        super().__init__(name)
        if kernel % 2 != 1:
            raise ValueError("kernel size must be odd for 'same' padding")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.relu = relu

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {
            "weight": (self.out_channels, self.in_channels * self.kernel * self.kernel),
            "bias": (self.out_channels,),
        }

    def fan_in(self) -> int:
        return self.in_channels * self.kernel * self.kernel

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        if x.ndim != 3 or x.shape[0] != self.in_channels:
            raise ShapeMismatchError(f"{self.name}: expected ({self.in_channels}, T, F) input, got {x.shape}")
        _, rows, cols = x.shape
        pad = self.kernel // 2
        padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
        patches = sliding_window_view(padded, (self.kernel, self.kernel), axis=(1, 2))
        # (C, T, F, k, k) -> (T*F, C*k*k)
        im2col = patches.transpose(1, 2, 0, 3, 4).reshape(rows * cols, -1)
        z = im2col @ params["weight"].T + params["bias"]
        active = z > 0 if self.relu else None
        y = np.where(active, z, 0.0) if self.relu else z
        out = y.reshape(rows, cols, self.out_channels).transpose(2, 0, 1)
        return out, (im2col, active, x.shape)

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        im2col, active, in_shape = ctx
        channels, rows, cols = in_shape
        dz = dy.transpose(1, 2, 0).reshape(rows * cols, self.out_channels)
        if self.relu:
            dz = np.where(active, dz, 0.0)
        grads = {"weight": dz.T @ im2col, "bias": dz.sum(axis=0)}

        dcols = (dz @ params["weight"]).reshape(rows, cols, channels, self.kernel, self.kernel)
        pad = self.kernel // 2
        dpadded = np.zeros((channels, rows + 2 * pad, cols + 2 * pad))
        for i in range(self.kernel):
            for j in range(self.kernel):
                dpadded[:, i : i + rows, j : j + cols] += dcols[:, :, :, i, j].transpose(2, 0, 1)
        return dpadded[:, pad : pad + rows, pad : pad + cols], grads


class Dense(Layer):
    """Affine map over the last axis, optionally followed by ReLU (subgradient 0 at 0)."""

    def __init__(self, name: str, in_features: int, out_features: int, relu: bool = False):
        super().__init__(name)
        self.in_features = in_features
        self.out_features = out_features
        self.relu = relu

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {"weight": (self.out_features, self.in_features), "bias": (self.out_features,)}

    def fan_in(self) -> int:
        return self.in_features

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        if x.shape[-1] != self.in_features:
            raise ShapeMismatchError(f"{self.name}: expected last axis {self.in_features}, got {x.shape}")
        z = x @ params["weight"].T + params["bias"]
        if not self.relu:
            return z, (x, None)
        active = z > 0
        return np.where(active, z, 0.0), (x, active)

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        x, active = ctx
        dz = np.where(active, dy, 0.0) if self.relu else dy
        x2 = x.reshape(-1, self.in_features)
        dz2 = dz.reshape(-1, self.out_features)
        grads = {"weight": dz2.T @ x2, "bias": dz2.sum(axis=0)}
        return dz @ params["weight"], grads


class Flatten(Layer):
    """(channels, time, freq) -> (time, channels * freq), keeping time as the pooling axis."""

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        channels, rows, cols = x.shape
        return x.transpose(1, 0, 2).reshape(rows, channels * cols), x.shape

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        channels, rows, cols = ctx
        return dy.reshape(rows, channels, cols).transpose(1, 0, 2), {}


class StatsPool(Layer):
    """Concatenated per-feature mean and standard deviation over time; std floored at 1e-8."""

    def __init__(self, name: str, floor: float = STD_FLOOR):
        super().__init__(name)
        self.floor = floor

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        mean = x.mean(axis=0)
        centered = x - mean
        variance = (centered**2).mean(axis=0)
        std = np.sqrt(np.maximum(variance, self.floor**2))
        return np.concatenate([mean, std]), (centered, std, variance >= self.floor**2)

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        centered, std, live = ctx
        n, width = centered.shape
        d_mean, d_std = dy[:width], dy[width:]
        d_std = np.where(live, d_std, 0.0)
        dx = d_mean / n + centered * (d_std / (n * std))
        return dx, {}


class L2Normalize(Layer):
    """Project the embedding onto the unit sphere."""

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        norm = max(float(np.linalg.norm(x)), NORM_FLOOR)
        y = x / norm
        return y, (y, norm)

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        y, norm = ctx
        return (dy - y * np.dot(y, dy)) / norm, {}
