"""CSV dumps of 2-D grids (frame-major rows) for debugging and exact inspection."""

import logging
from pathlib import Path

import numpy as np

from sta_mdct.errors import AudioWriteError, ShapeMismatchError

logger = logging.getLogger(__name__)


def write_grid_csv(grid: np.ndarray, path: Path | str) -> None:
    """
    Write a 2-D grid as comma-separated rows, one row per frame.

    Values are written with 17 significant digits so they read back exactly.

    Args:
        grid (np.ndarray): 2-D array.
        path (Path | str): Destination file.

    Raises:
        ShapeMismatchError: Grid is not 2-D.
        AudioWriteError: Path is not writable.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D grid, got shape {grid.shape}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, grid, fmt="%.17g", delimiter=",")
    except OSError as e:
        raise AudioWriteError(f"cannot write {path}: {e}") from e
    logger.debug(f"Wrote {grid.shape[0]}x{grid.shape[1]} grid to {path}")


def read_grid_csv(path: Path | str) -> np.ndarray:
    return np.loadtxt(Path(path), delimiter=",", ndmin=2)
