"""
Synthetic multi-speaker corpus and the WAV-directory corpus format.

Each synthetic speaker is a fixed set of three harmonics of a speaker-specific
fundamental. Utterances redraw phases and amplitudes and add white noise at a fixed SNR;
the sum is then filtered by a speaker-specific formant envelope (a zero-phase gain applied
in the FFT domain), scaled to a common RMS and rounded to integers so it survives a WAV
round trip bit-exactly.

On disk a corpus is `<root>/<speaker>/<utt>.wav` plus `<root>/manifest.csv` with
`path,speaker_id` rows (paths relative to the root).
"""

import csv
import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sp_fft

from sta_mdct.audio.wav import read_wav, round_half_away, write_wav
from sta_mdct.audio.waveform import clamp_to_range
from sta_mdct.config import SAMPLE_RATE
from sta_mdct.errors import CorpusError
from sta_mdct.schemas.corpus import CorpusSpec
from sta_mdct.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
F0_RANGE = (100.0, 260.0)
HARMONIC_CHOICES = np.arange(1, 17)
N_SIGNATURE_TONES = 3


@dataclass(frozen=True)
class SpeakerSignature:
    speaker_id: str
    frequencies: np.ndarray
    formant_center: float
    formant_bandwidth: float

    def envelope(self, frequencies: np.ndarray) -> np.ndarray:
        """Formant gain in [1, 2]: a Gaussian bump centred on the formant."""
        return 1.0 + np.exp(-0.5 * ((frequencies - self.formant_center) / self.formant_bandwidth) ** 2)


@dataclass(frozen=True)
class Utterance:
    speaker_id: str
    index: int
    samples: np.ndarray
    path: str | None = None

    @property
    def ref(self) -> str:
        """Path relative to the corpus root, as written by `write_corpus`."""
        return self.path or f"{self.speaker_id}/{self.index:03d}.wav"


@dataclass
class Corpus:
    utterances: list[Utterance]
    signatures: dict[str, SpeakerSignature] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    @property
    def speakers(self) -> list[str]:
        """Speaker ids in order of first appearance."""
        return list(dict.fromkeys(u.speaker_id for u in self.utterances))

    def by_speaker(self) -> dict[str, list[Utterance]]:
        grouped: dict[str, list[Utterance]] = {s: [] for s in self.speakers}
        for u in self.utterances:
            grouped[u.speaker_id].append(u)
        return grouped

    def split(self, n_train: int, n_enroll: int) -> tuple["Corpus", "Corpus", "Corpus"]:
        """
        Per-speaker split by utterance order: first n_train for training, the next
        n_enroll for enrollment, the rest for testing.
        """
        train, enrollment, test = [], [], []
        for utts in self.by_speaker().values():
            train.extend(utts[:n_train])
            enrollment.extend(utts[n_train : n_train + n_enroll])
            test.extend(utts[n_train + n_enroll :])
        return Corpus(train, self.signatures), Corpus(enrollment, self.signatures), Corpus(test, self.signatures)


def _draw_signatures(spec: CorpusSpec) -> list[SpeakerSignature]:
    rng = make_rng(spec.seed)
    width = max(2, len(str(spec.n_speakers - 1)))
    signatures: list[SpeakerSignature] = []
    seen: set[tuple[float, ...]] = set()
    while len(signatures) < spec.n_speakers:
        f0 = rng.uniform(*F0_RANGE)
        harmonics = np.sort(rng.choice(HARMONIC_CHOICES, N_SIGNATURE_TONES, replace=False))
        frequencies = f0 * harmonics
        center = rng.uniform(400.0, 3000.0)
        bandwidth = rng.uniform(150.0, 400.0)
        key = tuple(np.round(frequencies, 3))
        if key in seen:
            continue
        seen.add(key)
        speaker_id = f"spk{len(signatures):0{width}d}"
        signatures.append(SpeakerSignature(speaker_id, frequencies, center, bandwidth))
    return signatures


def synth_utterance(signature: SpeakerSignature, spec: CorpusSpec, seed: int) -> np.ndarray:
    """
    One integer-valued utterance of `signature` on the 16-bit scale.

    The formant envelope filters tones and noise alike, so the speaker's spectral shape
    is visible across the whole band and not only at the three signature tones.
    """
    rng = make_rng(seed)
    n = int(round(spec.duration * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    phases = rng.uniform(0.0, 2 * np.pi, N_SIGNATURE_TONES)
    amplitudes = rng.uniform(0.5, 1.0, N_SIGNATURE_TONES)
    tones = (amplitudes[:, None] * np.sin(2 * np.pi * signature.frequencies[:, None] * t + phases[:, None])).sum(0)

    tone_rms = np.sqrt(np.mean(tones**2))
    noisy = tones + rng.normal(0.0, tone_rms * 10 ** (-spec.noise_snr_db / 20), n)
    gain = signature.envelope(sp_fft.rfftfreq(n, 1.0 / SAMPLE_RATE))
    shaped = sp_fft.irfft(sp_fft.rfft(noisy) * gain, n=n)
    scaled = shaped * (spec.target_rms / np.sqrt(np.mean(shaped**2)))
    return clamp_to_range(round_half_away(scaled))


def synth_corpus(spec: CorpusSpec) -> Corpus:
    """
    Generate the deterministic synthetic corpus described by `spec`.

    Args:
        spec (CorpusSpec): Corpus definition.

    Returns:
        Corpus: Utterances grouped speaker by speaker, with their signatures.

    Raises:
        CorpusError: Fewer than two speakers requested.
    """
    if spec.n_speakers < 2:
        raise CorpusError(f"a corpus needs at least 2 speakers, got {spec.n_speakers}")
    signatures = _draw_signatures(spec)
    utterances = [
        Utterance(sig.speaker_id, u, synth_utterance(sig, spec, derive_seed(spec.seed, s, u)))
        for s, sig in enumerate(signatures)
        for u in range(spec.utterances_per_speaker)
    ]
    logger.info(f"[CORPUS] Synthesized {len(utterances)} utterances for {spec.n_speakers} speakers (seed {spec.seed})")
    return Corpus(utterances, {sig.speaker_id: sig for sig in signatures})


def write_corpus(corpus: Corpus, root: Path | str) -> Path:
    """Write `<root>/<speaker>/<utt>.wav` files and the manifest; returns the manifest path."""
    root = Path(root)
    rows = []
    for u in corpus:
        relative = Path(u.speaker_id) / f"{u.index:03d}.wav"
        (root / u.speaker_id).mkdir(parents=True, exist_ok=True)
        write_wav(root / relative, u.samples)
        rows.append((relative.as_posix(), u.speaker_id))
    manifest = root / MANIFEST_NAME
    with manifest.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["path", "speaker_id"])
        writer.writerows(rows)
    logger.info(f"[CORPUS] Wrote {len(rows)} utterances to {root}")
    return manifest


def _manifest_rows(root: Path) -> list[tuple[str, str]]:
    manifest = root / MANIFEST_NAME
    if manifest.exists():
        with manifest.open(newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or not {"path", "speaker_id"} <= set(reader.fieldnames):
                raise CorpusError(f"{manifest}: expected a 'path,speaker_id' header")
            return [(row["path"], row["speaker_id"]) for row in reader]
    # No manifest: directory-per-speaker layout
    return [
        (wav.relative_to(root).as_posix(), speaker.name)
        for speaker in sorted(p for p in root.iterdir() if p.is_dir())
        for wav in sorted(speaker.glob("*.wav"))
    ]


def load_corpus(root: Path | str) -> Corpus:
    """
    Load a WAV-directory corpus, through its manifest when present.

    Raises:
        CorpusError: Missing directory, empty corpus or fewer than two speakers.
        AudioFormatError: A listed file is not 16-bit mono 16 kHz PCM.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    rows = _manifest_rows(root)
    if not rows:
        raise CorpusError(f"{root}: no utterances found")

    counters: dict[str, int] = {}
    utterances = []
    for relative, speaker in rows:
        index = counters.get(speaker, 0)
        counters[speaker] = index + 1
        utterances.append(Utterance(speaker, index, read_wav(root / relative).samples, relative))
    corpus = Corpus(utterances)
    if len(corpus.speakers) < 2:
        raise CorpusError(f"{root}: need at least 2 speakers, found {len(corpus.speakers)}")
    logger.info(f"[CORPUS] Loaded {len(utterances)} utterances of {len(corpus.speakers)} speakers from {root}")
    return corpus
