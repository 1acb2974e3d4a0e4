import pytest

from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.trials import ACCEPT, REJECT, Trial
from sta_mdct.services.sweeps import budget_curve, is_non_increasing, write_budget_curve
from sta_mdct.services.tables import read_table
from sta_mdct.services.trials import TrialSet

CLEAN = [0.9, 0.8, 0.2, 0.1]
ADVERSARIAL = [0.1, 0.2, 0.9, 0.8]
SNRS = [30.0, 40.0, 35.0, 45.0]


def _trialset():
    trials = [Trial(i, "spk00", f"t{i}", "spk00" if i < 2 else "spk01", ACCEPT if i < 2 else REJECT) for i in range(4)]
    return TrialSet(task="asv", trials=trials, enrolled=["spk00"], enrollment={})


def test_budget_curve_hand_values():
    """Raising the budget admits fewer perturbed trials, so both error rates fall back toward clean."""
    points = budget_curve(_trialset(), CLEAN, ADVERSARIAL, SNRS, [float("inf"), 0.0, 37.5])

    assert [p.budget for p in points] == [0.0, 37.5, float("inf")]
    assert [p.eer_impersonation for p in points] == pytest.approx([0.5, 0.25, 0.0])
    assert [p.eer_evasion for p in points] == pytest.approx([0.5, 0.25, 0.0])
    assert is_non_increasing([p.min_dcf_impersonation for p in points])


def test_budget_curve_table(tmp_path):
    points = budget_curve(_trialset(), CLEAN, ADVERSARIAL, SNRS, [0.0, float("inf")])
    rows = read_table(write_budget_curve(points, tmp_path / "budget" / "A__sta-mdct__B.csv"))

    assert [r["budget_db"] for r in rows] == ["0.0", "inf"]
    assert rows[1]["eer_evasion"] == "0.0"


def test_non_increasing():
    assert is_non_increasing([0.5, 0.5, 0.2])
    assert not is_non_increasing([0.2, 0.3])
    assert is_non_increasing([])


def test_white_box_cells():
    plan = ExperimentPlan(models={"A": "a.stam", "B": "b.stam", "C": "a.stam"}, surrogates=["A+B"], victims=["B"])
    assert plan.is_white_box("A+B", "B")
    assert plan.is_white_box("A", "C")
    assert not plan.is_white_box("A", "B")
