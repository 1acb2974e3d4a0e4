"""
RIFF/WAVE PCM 16-bit mono 16 kHz reader and writer.

Decoding is delegated to scipy.io.wavfile; this module enforces the one format the
pipeline accepts and the exact integer conversion rules.
"""

import logging
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from sta_mdct.audio.waveform import Waveform, as_samples
from sta_mdct.config import SAMPLE_MAX, SAMPLE_MIN, SAMPLE_RATE
from sta_mdct.errors import AudioFormatError, AudioWriteError

logger = logging.getLogger(__name__)


def read_wav(path: Path | str) -> Waveform:
    """
    Read a PCM 16-bit mono 16 kHz WAV file without normalization.

    Args:
        path (Path | str): File to read.

    Returns:
        Waveform: Samples as float64 holding the stored integers exactly.

    Raises:
        AudioFormatError: Malformed header or unsupported encoding; `field` names the
            offending header field (riff_header, bits_per_sample, channels, sample_rate).
    """
    path = Path(path)
    if not path.exists():
        raise AudioFormatError("path", f"file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError, OSError) as e:
        raise AudioFormatError("riff_header", f"{path}: {e}") from e

    if data.dtype != np.int16:
        raise AudioFormatError("bits_per_sample", f"{path}: expected 16-bit PCM, got dtype {data.dtype}")
    if data.ndim != 1:
        raise AudioFormatError("channels", f"{path}: expected mono, got {data.shape[1]} channels")
    if rate != SAMPLE_RATE:
        raise AudioFormatError("sample_rate", f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz")

    logger.debug("Read %d samples from %s", data.shape[0], path)
    return Waveform(data.astype(np.float64), sample_rate=rate)


def round_half_away(samples: np.ndarray) -> np.ndarray:
    """Round to the nearest integer, ties away from zero (-0.5 -> -1, 0.5 -> 1)."""
    return np.sign(samples) * np.floor(np.abs(samples) + 0.5)


def write_wav(path: Path | str, waveform: Waveform | np.ndarray) -> None:
    """
    Write a waveform as PCM 16-bit mono.

    Samples are rounded half away from zero. Out-of-range samples are rejected, not
    clamped: they mean a clip step is missing upstream.

    Args:
        path (Path | str): Destination file.
        waveform (Waveform | np.ndarray): Samples on the 16-bit scale.

    Raises:
        AudioWriteError: Out-of-range or non-finite samples, or an unwritable path.
    """
    path = Path(path)
    samples = as_samples(waveform)
    rate = waveform.sample_rate if isinstance(waveform, Waveform) else SAMPLE_RATE

    if not np.all(np.isfinite(samples)):
        raise AudioWriteError(f"{path}: non-finite samples")
    rounded = round_half_away(samples)
    bad = np.flatnonzero((rounded < SAMPLE_MIN) | (rounded > SAMPLE_MAX))
    if bad.size:
        raise AudioWriteError(
            f"{path}: {bad.size} samples outside [-32768, 32767] (first at index {bad[0]}: {samples[bad[0]]})"
        )

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        wavfile.write(path, rate, rounded.astype(np.int16))
    except OSError as e:
        raise AudioWriteError(f"cannot write {path}: {e}") from e
    logger.debug("Wrote %d samples to %s", samples.shape[0], path)
