import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from sta_mdct.audio.waveform import ArrayLike, Waveform
from sta_mdct.errors import CorpusError, ShapeMismatchError
from sta_mdct.nets.layers import NORM_FLOOR
from sta_mdct.nets.models import EmbeddingModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeakerProfile:
    """Enrollment embedding of one speaker (unit norm)."""

    speaker_id: str
    embedding: np.ndarray


def score(a: SpeakerProfile | np.ndarray, b: SpeakerProfile | np.ndarray) -> float:
    """
    Cosine similarity of two unit-norm embeddings.

    Args:
        a (SpeakerProfile | np.ndarray): Profile or embedding.
        b (SpeakerProfile | np.ndarray): Profile or embedding.

    Returns:
        float: Dot product, in [-1, 1] for unit vectors.

    Raises:
        ShapeMismatchError: Embedding dimensions differ.
    """
    ea = a.embedding if isinstance(a, SpeakerProfile) else np.asarray(a, dtype=np.float64)
    eb = b.embedding if isinstance(b, SpeakerProfile) else np.asarray(b, dtype=np.float64)
    if ea.shape != eb.shape:
        raise ShapeMismatchError(f"embedding dims differ: {ea.shape} vs {eb.shape}")
    return float(np.dot(ea, eb))


def profile_matrix(profiles: Sequence[SpeakerProfile]) -> np.ndarray:
    """Stack profiles into an (R, D) matrix, one row per speaker."""
    return np.stack([p.embedding for p in profiles])


def enroll(model: EmbeddingModel, utterances: Sequence[Waveform | ArrayLike], speaker_id: str) -> SpeakerProfile:
    """
    Enroll a speaker as the renormalized mean of per-utterance embeddings.

    Args:
        model (EmbeddingModel): Embedding model.
        utterances (Sequence[Waveform | ArrayLike]): At least one utterance.
        speaker_id (str): Identifier stored in the profile.

    Returns:
        SpeakerProfile: Unit-norm enrollment profile.

    Raises:
        CorpusError: No utterances given.
    """
    if not utterances:
        raise CorpusError(f"cannot enroll speaker '{speaker_id}' from zero utterances")
    embeddings = np.stack([model.forward(u)[0] for u in utterances])
    mean = embeddings.mean(axis=0)
    embedding = mean / max(float(np.linalg.norm(mean)), NORM_FLOOR)
    logger.debug(f"Enrolled speaker {speaker_id} from {len(utterances)} utterances")
    return SpeakerProfile(speaker_id, embedding)
