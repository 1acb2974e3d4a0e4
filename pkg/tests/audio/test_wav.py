import numpy as np
import pytest
from scipy.io import wavfile

from sta_mdct.audio.wav import read_wav, round_half_away, write_wav
from sta_mdct.audio.waveform import Waveform, as_samples, clamp_to_range
from sta_mdct.errors import AudioFormatError, AudioWriteError, InputTooShortError, ShapeMismatchError


def test_write_then_read_preserves_integer_samples(tmp_path):
    """Integer-valued samples survive a write/read cycle exactly, including the range ends."""
    samples = np.array([-32768.0, -1.0, 0.0, 1.0, 12345.0, 32767.0])
    write_wav(tmp_path / "x.wav", samples)

    assert np.array_equal(read_wav(tmp_path / "x.wav").samples, samples)


def test_write_rounds_half_away_from_zero(tmp_path):
    """Ties round away from zero before the 16-bit conversion."""
    write_wav(tmp_path / "x.wav", np.array([0.5, -0.5, 1.5, -2.5, 2.4]))
    assert read_wav(tmp_path / "x.wav").samples.tolist() == [1.0, -1.0, 2.0, -3.0, 2.0]
    assert round_half_away(np.array([-0.49, 0.49])).tolist() == [0.0, 0.0]


def test_write_rejects_out_of_range_samples(tmp_path):
    """Out-of-range samples mean a missing clip step and are refused, not clamped."""
    with pytest.raises(AudioWriteError):
        write_wav(tmp_path / "x.wav", np.array([0.0, 32767.6]))


def test_write_rejects_non_finite_samples(tmp_path):
    with pytest.raises(AudioWriteError):
        write_wav(tmp_path / "x.wav", np.array([0.0, np.nan]))


def test_write_creates_missing_directories(tmp_path):
    write_wav(tmp_path / "a" / "b" / "x.wav", np.zeros(4))
    assert (tmp_path / "a" / "b" / "x.wav").exists()


@pytest.mark.parametrize(
    "rate,data,field",
    [
        (8000, np.zeros(16, dtype=np.int16), "sample_rate"),
        (16000, np.zeros((16, 2), dtype=np.int16), "channels"),
        (16000, np.zeros(16, dtype=np.float32), "bits_per_sample"),
    ],
)
def test_read_rejects_unsupported_encodings(tmp_path, rate, data, field):
    """Each unsupported header field is named in the error."""
    path = tmp_path / "bad.wav"
    wavfile.write(path, rate, data)

    with pytest.raises(AudioFormatError) as exc:
        read_wav(path)
    assert exc.value.field == field


def test_read_rejects_garbage_and_missing_files(tmp_path):
    (tmp_path / "junk.wav").write_bytes(b"not a riff file at all")
    with pytest.raises(AudioFormatError) as exc:
        read_wav(tmp_path / "junk.wav")
    assert exc.value.field == "riff_header"

    with pytest.raises(AudioFormatError):
        read_wav(tmp_path / "missing.wav")


def test_waveform_validation():
    """Entry checks: range, minimum length and dimensionality."""
    Waveform(np.zeros(1024)).validate(min_length=1024)

    with pytest.raises(InputTooShortError):
        Waveform(np.zeros(10)).validate(min_length=1024)
    with pytest.raises(ShapeMismatchError):
        Waveform(np.array([40000.0])).validate()
    with pytest.raises(ShapeMismatchError):
        Waveform(np.zeros((2, 2)))
    with pytest.raises(ShapeMismatchError):
        Waveform(np.zeros(4), sample_rate=8000).validate()


def test_sample_helpers():
    assert as_samples(Waveform(np.ones(3))).dtype == np.float64
    assert clamp_to_range(np.array([-40000.0, 0.0, 40000.0])).tolist() == [-32768.0, 0.0, 32767.0]
    assert Waveform(np.zeros(16000)).duration == 1.0
