"""Grayscale PGM rendering of saliency maps: time left to right, frequency bottom-up."""

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from sta_mdct.dsp.export import write_grid_csv
from sta_mdct.errors import AudioWriteError, ModelFormatError
from sta_mdct.saliency.layer_cam import SaliencyMap

logger = logging.getLogger(__name__)


def to_pixels(normalized: np.ndarray) -> np.ndarray:
    """floor(255 * Z_hat + 0.5) as uint8, laid out (frequency descending, time)."""
    values = np.floor(255.0 * np.clip(normalized, 0.0, 1.0) + 0.5).astype(np.uint8)
    return np.ascontiguousarray(values.T[::-1])


def render(saliency: SaliencyMap, path: Path | str, with_csv: bool = True) -> Path:
    """
    Write a binary PGM (P5) image of Z_hat, plus a CSV dump of it next to the image.

    Args:
        saliency (SaliencyMap): Map to render.
        path (Path | str): Image path.
        with_csv (bool): Also write `<path>.csv` with the exact (time, frequency) grid.

    Returns:
        Path: The image path.

    Raises:
        AudioWriteError: Path is not writable.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(to_pixels(saliency.normalized)).save(path, format="PPM")
    except OSError as e:
        raise AudioWriteError(f"cannot write {path}: {e}") from e
    if with_csv:
        write_grid_csv(saliency.normalized, path.with_suffix(path.suffix + ".csv"))
    logger.info(f"[SALIENCY] Wrote {saliency.layer} map for {saliency.speaker_id} to {path}")
    return path


def read_pgm(path: Path | str) -> np.ndarray:
    """Pixel array of a grayscale PGM, as stored (frequency descending, time)."""
    try:
        with Image.open(Path(path)) as image:
            if image.mode != "L":
                raise ModelFormatError(f"{path}: expected an 8-bit grayscale image, got mode {image.mode}")
            return np.array(image)
    except OSError as e:
        raise ModelFormatError(f"cannot read {path}: {e}") from e
