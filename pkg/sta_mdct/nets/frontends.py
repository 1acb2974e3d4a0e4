"""Parameter-free input stages mapping raw samples to the first network tensor."""

from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from sta_mdct.dsp.features import logmel_backward, logmel_with_cache
from sta_mdct.errors import InputTooShortError
from sta_mdct.nets.layers import Grads, Layer, Params


class LogMelFrontend(Layer):
    """Waveform -> CMVN log-mel map shaped (1, T, n_mels) for the conv stack."""

    def __init__(self, name: str = "logmel", n_mels: int = 40):
        super().__init__(name)
        self.n_mels = n_mels

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        features, cache = logmel_with_cache(x, self.n_mels)
        return features.values[None, :, :], cache

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        return logmel_backward(dy[0], ctx), {}


class FrameFrontend(Layer):
    """Waveform -> scaled raw frames shaped (frames, frame_length)."""

    def __init__(self, name: str = "frames", frame_length: int = 512, hop: int = 256, scale: float = 1.0):
        super().__init__(name)
        self.frame_length = frame_length
        self.hop = hop
        self.scale = scale

    def n_frames(self, length: int) -> int:
        if length < self.frame_length:
            raise InputTooShortError(f"{self.name}: need at least {self.frame_length} samples, got {length}")
        return 1 + (length - self.frame_length) // self.hop

    def forward(self, x: np.ndarray, params: Params) -> tuple[np.ndarray, Any]:
        n = self.n_frames(x.shape[0])
        frames = sliding_window_view(x, self.frame_length)[:: self.hop][:n]
        return frames * self.scale, x.shape[0]

    def backward(self, dy: np.ndarray, ctx: Any, params: Params) -> tuple[np.ndarray, Grads]:
        length = ctx
        index = (np.arange(dy.shape[0]) * self.hop)[:, None] + np.arange(self.frame_length)
        dx = np.zeros(length)
        np.add.at(dx, index, dy * self.scale)
        return dx, {}
