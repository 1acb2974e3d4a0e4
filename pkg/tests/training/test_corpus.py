import numpy as np
import pytest
from scipy import fft as sp_fft
from scipy import signal
from scipy.signal import windows

from sta_mdct.audio.wav import write_wav
from sta_mdct.errors import CorpusError
from sta_mdct.schemas.corpus import CorpusSpec
from sta_mdct.training.corpus import MANIFEST_NAME, load_corpus, synth_corpus, write_corpus


def test_synthetic_corpus_is_deterministic(tiny_corpus):
    again = synth_corpus(CorpusSpec(n_speakers=4, utterances_per_speaker=8, duration=0.1, seed=3))

    assert tiny_corpus.speakers == ["spk00", "spk01", "spk02", "spk03"]
    assert len(tiny_corpus) == 32
    assert all(np.array_equal(a.samples, b.samples) for a, b in zip(tiny_corpus, again))


def test_synthetic_utterances_are_integer_pcm(tiny_corpus):
    for u in tiny_corpus:
        assert u.samples.shape == (1600,)
        assert np.array_equal(u.samples, np.round(u.samples))
        assert np.sqrt(np.mean(u.samples**2)) == pytest.approx(2400.0, rel=0.01)


def test_split_is_per_speaker_and_in_order(tiny_corpus):
    train, enrollment, test = tiny_corpus.split(3, 2)

    assert (len(train), len(enrollment), len(test)) == (12, 8, 12)
    assert [u.index for u in enrollment.by_speaker()["spk01"]] == [3, 4]
    assert test.speakers == tiny_corpus.speakers


def test_written_corpus_loads_back_bit_exact(tiny_corpus, tmp_path):
    manifest = write_corpus(tiny_corpus, tmp_path / "corpus")
    loaded = load_corpus(tmp_path / "corpus")

    assert manifest.name == MANIFEST_NAME
    assert loaded.speakers == tiny_corpus.speakers
    assert [u.ref for u in loaded] == [u.ref for u in tiny_corpus]
    assert all(np.array_equal(a.samples, b.samples) for a, b in zip(loaded, tiny_corpus))


def test_directory_layout_without_manifest(tmp_path):
    for speaker in ("alice", "bob"):
        write_wav(tmp_path / "c" / speaker / "0.wav", np.zeros(800))
    corpus = load_corpus(tmp_path / "c")
    assert corpus.speakers == ["alice", "bob"]


def test_corpus_errors(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "nowhere")

    (tmp_path / "empty").mkdir()
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "empty")

    write_wav(tmp_path / "solo" / "alice" / "0.wav", np.zeros(800))
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "solo")


def _power_spectrum(samples):
    return np.abs(sp_fft.rfft(samples * windows.hann(samples.shape[0], sym=False))) ** 2


def test_spectral_peaks_sit_on_the_signature_tones():
    """With 1 s utterances a DFT bin is 1 Hz wide; the three tallest peaks are the signature tones."""
    corpus = synth_corpus(CorpusSpec(n_speakers=3, utterances_per_speaker=2, duration=1.0, seed=5))

    for u in corpus:
        power = _power_spectrum(u.samples)
        freqs = sp_fft.rfftfreq(u.samples.shape[0], 1.0 / 16000)
        peaks, _ = signal.find_peaks(power)
        tallest = np.sort(freqs[peaks[np.argsort(power[peaks])[-3:]]])
        assert np.all(np.abs(tallest - corpus.signatures[u.speaker_id].frequencies) <= 1.0)


def test_formant_envelope_shapes_the_noise_floor():
    """Away from the tones the noise is louder around the formant than far above it."""
    corpus = synth_corpus(CorpusSpec(n_speakers=2, utterances_per_speaker=3, duration=1.0, seed=8))

    for speaker, utts in corpus.by_speaker().items():
        sig = corpus.signatures[speaker]
        power = np.mean([_power_spectrum(u.samples) for u in utts], axis=0)
        freqs = sp_fft.rfftfreq(16000, 1.0 / 16000)
        off_tone = np.all(np.abs(freqs[:, None] - sig.frequencies[None, :]) > 20.0, axis=1)

        formant = off_tone & (np.abs(freqs - sig.formant_center) <= sig.formant_bandwidth / 2)
        far = off_tone & (freqs >= 7000.0) & (freqs < 7900.0)
        assert power[formant].mean() > 2.0 * power[far].mean()
