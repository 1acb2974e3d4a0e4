import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.signal import windows as sp_windows

from sta_mdct.config import KBD_BETA, MDCT_WINDOW
from sta_mdct.errors import ConfigError

logger = logging.getLogger(__name__)


class WindowKind(str, Enum):
    KBD = "kbd"
    HAMMING = "hamming"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class Window:
    """Analysis/synthesis window h(n) of even length W."""

    coefficients: np.ndarray
    kind: WindowKind
    beta: float | None = None

    @property
    def length(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def half(self) -> int:
        return self.length // 2

    def princen_bradley_error(self) -> float:
        """max |h(n)^2 + h(n + W/2)^2 - 1| over the first half."""
        h = self.coefficients
        return float(np.max(np.abs(h[: self.half] ** 2 + h[self.half :] ** 2 - 1.0)))


@lru_cache(maxsize=16)
def _kbd_coefficients(length: int, beta: float) -> np.ndarray:
    coefficients = sp_windows.kaiser_bessel_derived(length, beta)
    coefficients.setflags(write=False)
    return coefficients


def kbd_window(length: int = MDCT_WINDOW, beta: float = KBD_BETA) -> Window:
    """
    Build a Kaiser-Bessel-derived window.

    The first half is the square root of the normalized cumulative sum of a
    length-(W/2 + 1) Kaiser window; the second half mirrors it, so the
    Princen-Bradley condition holds by construction.

    Args:
        length (int): Window length W, even and >= 4.
        beta (float): Kaiser shape parameter, >= 0.

    Returns:
        Window: KBD window.

    Raises:
        ConfigError: Odd or too small length, or negative beta.
    """
    if length < 4 or length % 2:
        raise ConfigError(f"KBD window length must be even and >= 4, got {length}")
    if beta < 0:
        raise ConfigError(f"KBD beta must be non-negative, got {beta}")
    return Window(_kbd_coefficients(int(length), float(beta)), WindowKind.KBD, float(beta))


def hamming_window(length: int) -> Window:
    """Periodic Hamming window, used by the log-mel frontend."""
    if length < 2:
        raise ConfigError(f"Hamming window length must be >= 2, got {length}")
    return Window(sp_windows.hamming(length, sym=False), WindowKind.HAMMING)


def rectangular_window(length: int) -> Window:
    """All-ones window. Not Princen-Bradley compliant; used for kernel checks."""
    return Window(np.ones(length), WindowKind.RECTANGULAR)
