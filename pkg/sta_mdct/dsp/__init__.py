from sta_mdct.dsp.dct import dct_adjoint, dct_frames, idct_adjoint, idct_frames
from sta_mdct.dsp.features import FeatureMap, logmel, logmel_backward, logmel_with_cache
from sta_mdct.dsp.mdct import (
    SpectrumFrames,
    calibrate_inverse_scale,
    imdct,
    imdct_adjoint,
    mdct,
    mdct_adjoint,
)
from sta_mdct.dsp.windows import Window, WindowKind, hamming_window, kbd_window

__all__ = [
    "FeatureMap",
    "SpectrumFrames",
    "Window",
    "WindowKind",
    "calibrate_inverse_scale",
    "dct_adjoint",
    "dct_frames",
    "hamming_window",
    "idct_adjoint",
    "idct_frames",
    "imdct",
    "imdct_adjoint",
    "kbd_window",
    "logmel",
    "logmel_backward",
    "logmel_with_cache",
    "mdct",
    "mdct_adjoint",
]
