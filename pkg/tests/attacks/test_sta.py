import numpy as np
import pytest

from sta_mdct.attacks.common import Surrogate, check_ball
from sta_mdct.attacks.gradient_sign import ifgsm, mifgsm
from sta_mdct.attacks.objectives import AttackObjective, Task
from sta_mdct.attacks.sta import sta_attack, transformed_gradient
from sta_mdct.nets.speakers import enroll
from sta_mdct.schemas.attack import AttackConfig, AttackerKind


@pytest.fixture
def surrogate(framenet, tiny_corpus):
    profile = enroll(framenet, [u.samples for u in tiny_corpus.by_speaker()["spk01"][:2]], "spk01")
    return Surrogate(framenet, AttackObjective(Task.ASV_IMPERSONATION, (profile,)), "B")


def _cfg(**overrides):
    values = {"iterations": 3, "n_transforms": 3, "window_length": 64, "seed": 5}
    values.update(overrides)
    return AttackConfig(**values)


def test_identity_transform_degenerates_to_ifgsm(surrogate, speech_like):
    cfg = _cfg(sigma=0.0, rho=0.0)
    assert np.array_equal(sta_attack(speech_like, surrogate, cfg), ifgsm(speech_like, surrogate, cfg))


def test_momentum_update_rule_with_identity_transform(surrogate, speech_like):
    cfg = _cfg(sigma=0.0, rho=0.0, update_rule="mi-fgsm")
    assert np.array_equal(sta_attack(speech_like, surrogate, cfg), mifgsm(speech_like, surrogate, cfg))


@pytest.mark.parametrize("attacker", [AttackerKind.STA_MDCT, AttackerKind.STA_DCT])
def test_sta_is_deterministic_and_bounded(surrogate, speech_like, attacker):
    cfg = _cfg(attacker=attacker)
    first, second = sta_attack(speech_like, surrogate, cfg), sta_attack(speech_like, surrogate, cfg)

    assert np.array_equal(first, second)
    assert check_ball(first, speech_like, cfg.epsilon) <= cfg.epsilon
    assert not np.array_equal(first, sta_attack(speech_like, surrogate, _cfg(attacker=attacker, seed=6)))


def test_transformed_gradient_differs_from_plain_gradient(surrogate, speech_like):
    cfg = _cfg()
    averaged = transformed_gradient(speech_like, surrogate, cfg.transform, cfg.seed, 0, cfg.n_transforms)
    plain = surrogate.loss_and_gradient(speech_like)[1]

    assert averaged.shape == plain.shape
    assert np.all(np.isfinite(averaged))
    assert not np.allclose(averaged, plain)
