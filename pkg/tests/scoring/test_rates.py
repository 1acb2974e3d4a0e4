import pytest

from sta_mdct.errors import ShapeMismatchError
from sta_mdct.scoring.rates import rates
from sta_mdct.scoring.trials import ACCEPT, REJECT, Trial


def _trial(index, expected, target=None, adversarial=False):
    if adversarial:
        return Trial(index, "e", f"t{index}", "s", expected, target, f"adv{index}", 30.0)
    return Trial(index, "e", f"t{index}", "s", expected, target)


def test_verification_rates():
    trials = [_trial(0, ACCEPT), _trial(1, REJECT), _trial(2, REJECT), _trial(3, REJECT)]
    report = rates(trials, [ACCEPT, ACCEPT, REJECT, REJECT])

    assert report.far == pytest.approx(1 / 3)
    assert report.tasr is None
    assert report.ier is None


def test_identification_rates():
    """Open-set unknowns count toward FAR; a None decision is a rejection."""
    trials = [
        _trial(0, "spk01", "spk02", adversarial=True),
        _trial(1, "spk02", "spk00", adversarial=True),
        _trial(2, None, "spk01", adversarial=True),
        _trial(3, "spk00"),
    ]
    report = rates(trials, ["spk02", "spk02", None, "spk00"])

    assert report.far == 0.0
    assert report.tasr == pytest.approx(1 / 3)
    assert report.ier == pytest.approx(1 / 3)


def test_empty_and_mismatched_tables():
    assert rates([], []).far is None
    with pytest.raises(ShapeMismatchError):
        rates([_trial(0, ACCEPT)], [])
