"""
Decision thresholds at the clean EER operating point.

Each model gets its own theta, computed once on clean data and frozen for both attack
objectives and victim decisions.
"""

import logging
from collections.abc import Mapping, Sequence

import numpy as np

from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.nets.speakers import SpeakerProfile, profile_matrix
from sta_mdct.scoring.detection import eer
from sta_mdct.scoring.trials import ScoreSet
from sta_mdct.training.corpus import Utterance

logger = logging.getLogger(__name__)


def threshold_at_eer(scores: Sequence[float] | np.ndarray, labels: Sequence[bool] | np.ndarray) -> float:
    """theta of the EER crossing of a clean score set."""
    return eer(ScoreSet(np.asarray(scores), np.asarray(labels)))[1]


def calibrate_identification(
    model: EmbeddingModel, profiles: Sequence[SpeakerProfile], utterances: Mapping[str, Sequence[Utterance]]
) -> float:
    """
    Open-set threshold from clean test utterances.

    Utterances of enrolled speakers score against their own profile (targets); every
    other utterance contributes its best score over the enrolled set (non-targets).
    When every speaker is enrolled, the best score over the other profiles stands in
    for the non-target.

    Args:
        model (EmbeddingModel): Model whose embedding space the profiles live in.
        profiles (Sequence[SpeakerProfile]): Enrolled speakers.
        utterances (Mapping[str, Sequence[Utterance]]): Clean test utterances by speaker.

    Returns:
        float: theta.
    """
    matrix = profile_matrix(profiles)
    index = {p.speaker_id: i for i, p in enumerate(profiles)}
    targets: list[float] = []
    nontargets: list[float] = []
    for speaker, utts in utterances.items():
        for u in utts:
            scores = matrix @ model.forward(u.samples)[0]
            if speaker in index:
                targets.append(float(scores[index[speaker]]))
                if len(index) == len(utterances):
                    nontargets.append(float(np.max(np.delete(scores, index[speaker]))))
            else:
                nontargets.append(float(np.max(scores)))
    theta = threshold_at_eer(targets + nontargets, [True] * len(targets) + [False] * len(nontargets))
    logger.info(f"[EXPERIMENT] {model.architecture}: identification threshold {theta:.4f}")
    return theta
