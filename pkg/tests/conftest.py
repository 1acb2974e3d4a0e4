"""Test configuration and shared fixtures.

Models and corpora here are deliberately tiny so gradient checks and attack runs stay
fast; the autouse fixture runs every test from a scratch working directory.
"""

import numpy as np
import pytest

from sta_mdct.nets.models import build_model
from sta_mdct.nets.speakers import enroll
from sta_mdct.schemas.corpus import CorpusSpec
from sta_mdct.schemas.model import ModelSpec
from sta_mdct.training.corpus import synth_corpus

SHORT_LENGTH = 1600  # 0.1 s at 16 kHz


@pytest.fixture(autouse=True)
def reset_state(tmp_path, monkeypatch):
    """Run each test from its own directory so relative outputs (results/, .env) never leak."""
    monkeypatch.chdir(tmp_path)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def speech_like(rng):
    """A short harmonic signal with a little noise, on the 16-bit scale."""
    t = np.arange(SHORT_LENGTH) / 16000.0
    signal = sum(np.sin(2 * np.pi * 140.0 * h * t) / h for h in range(1, 6))
    signal = 3000.0 * signal / np.max(np.abs(signal)) + rng.normal(0.0, 60.0, SHORT_LENGTH)
    return np.round(signal)


@pytest.fixture
def convnet_spec():
    return ModelSpec(architecture="convnet-a", embedding_dim=8, n_mels=16, conv_channels=(2, 3))


@pytest.fixture
def framenet_spec():
    return ModelSpec(architecture="framenet-b", embedding_dim=8, frame_length=64, frame_hop=32, hidden_dim=12)


@pytest.fixture
def convnet(convnet_spec):
    return build_model(convnet_spec, seed=1)


@pytest.fixture
def framenet(framenet_spec):
    return build_model(framenet_spec, seed=2)


@pytest.fixture
def tiny_corpus():
    """4 speakers x 8 utterances of 0.1 s."""
    return synth_corpus(CorpusSpec(n_speakers=4, utterances_per_speaker=8, duration=0.1, seed=3))


@pytest.fixture
def profiles(convnet, tiny_corpus):
    """convnet profiles of every tiny_corpus speaker, enrolled on two utterances each."""
    return [enroll(convnet, [u.samples for u in utts[:2]], s) for s, utts in tiny_corpus.by_speaker().items()]
