import numpy as np
import pytest

from sta_mdct.errors import CorpusError, ShapeMismatchError
from sta_mdct.nets.speakers import SpeakerProfile, enroll, profile_matrix, score


def test_enrollment_is_renormalized_mean(convnet, tiny_corpus):
    utterances = [u.samples for u in tiny_corpus.by_speaker()["spk00"][:3]]
    profile = enroll(convnet, utterances, "spk00")

    mean = np.mean([convnet.forward(u)[0] for u in utterances], axis=0)
    assert profile.speaker_id == "spk00"
    assert np.allclose(profile.embedding, mean / np.linalg.norm(mean))


def test_score_is_cosine_of_unit_vectors(profiles):
    assert score(profiles[0], profiles[0]) == pytest.approx(1.0)
    assert -1.0 <= score(profiles[0], profiles[1]) <= 1.0
    assert profile_matrix(profiles).shape == (4, 8)


def test_enrollment_and_scoring_errors(convnet):
    with pytest.raises(CorpusError):
        enroll(convnet, [], "nobody")
    with pytest.raises(ShapeMismatchError):
        score(SpeakerProfile("a", np.ones(3)), np.ones(4))
