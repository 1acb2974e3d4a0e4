import numpy as np
import pytest

import sta_mdct.training.trainer as trainer
from sta_mdct.errors import CorpusError, TrainingDivergenceError
from sta_mdct.schemas.corpus import TrainConfig
from sta_mdct.training.corpus import Corpus, Utterance
from sta_mdct.training.trainer import softmax_cross_entropy, train


def test_softmax_cross_entropy_gradient():
    logits = np.array([2.0, 0.5, -1.0])
    loss, grad = softmax_cross_entropy(logits, 0)
    probs = np.exp(logits) / np.exp(logits).sum()

    assert loss == pytest.approx(-np.log(probs[0]))
    assert np.allclose(grad, probs - np.array([1.0, 0.0, 0.0]))


def test_training_reduces_loss(framenet, tiny_corpus):
    cfg = TrainConfig(epochs=8, learning_rate=0.01, batch_size=8, train_utterances=None, seed=0)
    trained, log = train(framenet, tiny_corpus, cfg)

    assert len(log.losses) == len(log.accuracies) == 8
    assert log.losses[-1] < log.losses[0]
    assert 0.0 <= log.final_accuracy <= 1.0
    assert not np.array_equal(trained.params, framenet.params)
    assert trained.spec == framenet.spec


def test_training_is_deterministic(framenet, tiny_corpus):
    cfg = TrainConfig(epochs=2, batch_size=16, train_utterances=4, seed=9)
    first, _ = train(framenet, tiny_corpus, cfg)
    second, _ = train(framenet, tiny_corpus, cfg)
    assert np.array_equal(first.params, second.params)


def test_training_failures(framenet, tiny_corpus, monkeypatch):
    with pytest.raises(CorpusError):
        train(framenet, Corpus(tiny_corpus.by_speaker()["spk00"]), TrainConfig(epochs=1))

    monkeypatch.setattr(trainer, "softmax_cross_entropy", lambda logits, label: (float("nan"), np.zeros_like(logits)))
    with pytest.raises(TrainingDivergenceError) as exc:
        train(framenet, tiny_corpus, TrainConfig(epochs=1))
    assert exc.value.epoch == 1


def _two_tone_corpus(rng):
    t = np.arange(1600) / 16000.0
    utterances = []
    for speaker, freq in (("low", 300.0), ("high", 4000.0)):
        for index in range(8):
            x = 3000.0 * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi)) + rng.normal(0.0, 30.0, t.shape)
            utterances.append(Utterance(speaker, index, np.round(x)))
    return Corpus(utterances)


def test_trivially_separable_speakers_are_learned(framenet, rng):
    cfg = TrainConfig(epochs=30, learning_rate=0.01, batch_size=4, train_utterances=None, seed=0)
    _, log = train(framenet, _two_tone_corpus(rng), cfg)
    assert log.final_accuracy >= 0.99


def test_zero_learning_rate_leaves_parameters_unchanged(framenet, tiny_corpus):
    cfg = TrainConfig(epochs=2, learning_rate=0.0, batch_size=8, train_utterances=4, seed=0)
    trained, log = train(framenet, tiny_corpus, cfg)

    assert np.array_equal(trained.params, framenet.params)
    assert len(log.losses) == 2
