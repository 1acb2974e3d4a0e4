import numpy as np
import pytest

from sta_mdct.errors import ConfigError, ShapeMismatchError, UndefinedMetricError
from sta_mdct.scoring.detection import eer, min_dcf, operating_points, sweep_thresholds
from sta_mdct.scoring.trials import ScoreSet
from tests.utils.fixture import oracle_eer, oracle_min_dcf, oracle_operating_points


def _score_set(targets, nontargets):
    scores = np.concatenate([targets, nontargets])
    labels = np.concatenate([np.ones(len(targets), dtype=bool), np.zeros(len(nontargets), dtype=bool)])
    return ScoreSet(scores, labels)


def test_hand_computed_eer_and_min_dcf():
    s = _score_set([0.9, 0.8, 0.3], [0.7, 0.2, 0.1])
    rate, theta = eer(s)

    assert rate == pytest.approx(1 / 3)
    assert theta == pytest.approx(0.5)
    assert min_dcf(s) == pytest.approx(1 / 3)


def test_identical_scores():
    """No threshold separates anything: EER interpolates to 0.5 and the best cost is rejecting all."""
    s = _score_set([0.5, 0.5], [0.5, 0.5])
    assert eer(s) == pytest.approx((0.5, 0.5))
    assert min_dcf(s) == pytest.approx(1.0)


def test_perfect_separation():
    s = _score_set([0.8, 0.9], [0.1, 0.2])
    rate, theta = eer(s)
    assert rate == 0.0
    assert 0.2 < theta <= 0.8
    assert min_dcf(s) == 0.0


def test_sweep_covers_extremes():
    points = operating_points(_score_set([0.9, 0.3], [0.5]))

    assert sweep_thresholds(np.array([0.3, 0.9, 0.5])).tolist() == pytest.approx([0.3, 0.4, 0.7, np.inf])
    assert (points.far[0], points.frr[0]) == (1.0, 0.0)
    assert (points.far[-1], points.frr[-1]) == (0.0, 1.0)
    assert len(points.rows()) == 4


def test_metrics_match_brute_force_on_random_sets():
    """1000 random sets of at most 50 trials, rounded so tied scores are common."""
    rng = np.random.default_rng(42)
    for _ in range(1000):
        targets = np.round(rng.normal(0.6, 0.2, int(rng.integers(1, 26))), 2)
        nontargets = np.round(rng.normal(0.3, 0.2, int(rng.integers(1, 26))), 2)
        s = _score_set(targets, nontargets)
        points = operating_points(s)

        assert list(zip(points.far.tolist(), points.frr.tolist())) == oracle_operating_points(targets, nontargets)
        assert eer(s)[0] == pytest.approx(oracle_eer(targets, nontargets), abs=1e-12)
        assert min_dcf(s) == pytest.approx(oracle_min_dcf(targets, nontargets), abs=1e-12)


def test_undefined_and_invalid_inputs():
    with pytest.raises(UndefinedMetricError):
        eer(ScoreSet(np.array([0.1, 0.2]), np.array([True, True])))
    with pytest.raises(UndefinedMetricError):
        ScoreSet(np.array([0.1, np.nan]), np.array([True, False]))
    with pytest.raises(ShapeMismatchError):
        ScoreSet(np.array([0.1]), np.array([True, False]))
    with pytest.raises(ConfigError):
        min_dcf(_score_set([0.9], [0.1]), p_target=1.0)
