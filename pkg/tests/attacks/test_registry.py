import numpy as np
import pytest
from prometheus_client import REGISTRY

from sta_mdct.attacks.common import Surrogate
from sta_mdct.attacks.gradient_sign import ifgsm
from sta_mdct.attacks.objectives import AttackObjective, Task
from sta_mdct.attacks.registry import run_attack
from sta_mdct.errors import ConfigError, InputTooShortError
from sta_mdct.nets.speakers import enroll
from sta_mdct.schemas.attack import AttackConfig, AttackerKind


@pytest.fixture
def surrogates(convnet, framenet, tiny_corpus):
    utterances = [u.samples for u in tiny_corpus.by_speaker()["spk02"][:2]]
    return [
        Surrogate(model, AttackObjective(Task.ASV_IMPERSONATION, (enroll(model, utterances, "spk02"),)), name)
        for model, name in [(convnet, "A"), (framenet, "B")]
    ]


def _count(attacker: str) -> float:
    return REGISTRY.get_sample_value("attacks_total", {"attacker": attacker}) or 0.0


@pytest.mark.parametrize("attacker", list(AttackerKind))
def test_every_attacker_respects_the_ball(surrogates, speech_like, attacker):
    cfg = AttackConfig(attacker=attacker, iterations=2, n_transforms=2, window_length=64, epsilon=30.0)
    before = _count(attacker.value)
    result = run_attack(speech_like, surrogates[:1], cfg)

    assert result.attacker == attacker
    assert result.surrogates == ("A",)
    assert result.adversarial.shape == speech_like.shape
    assert result.linf <= 30.0
    assert _count(attacker.value) == before + 1


def test_plain_attackers_fuse_ensembles(surrogates, speech_like):
    cfg = AttackConfig(attacker=AttackerKind.IFGSM, iterations=2, window_length=64)
    result = run_attack(speech_like, surrogates, cfg)
    assert result.surrogates == ("A", "B")
    assert result.linf <= cfg.epsilon

    single = run_attack(speech_like, surrogates[:1], cfg)
    assert np.array_equal(single.adversarial, ifgsm(speech_like, surrogates[0], cfg))


def test_transform_attackers_run_as_ensemble(surrogates, speech_like):
    cfg = AttackConfig(iterations=2, n_transforms=2, window_length=64, ensemble_weights=[0.25, 0.75])
    result = run_attack(speech_like, surrogates, cfg)
    assert result.linf <= cfg.epsilon


def test_input_validation(surrogates, speech_like):
    with pytest.raises(ConfigError):
        run_attack(speech_like, [], AttackConfig())
    with pytest.raises(InputTooShortError):
        run_attack(speech_like[:300], surrogates, AttackConfig(window_length=64))
    with pytest.raises(InputTooShortError):
        run_attack(speech_like, surrogates, AttackConfig(window_length=2048))
