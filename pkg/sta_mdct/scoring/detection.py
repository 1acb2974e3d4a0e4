"""
Threshold-sweep detection metrics: EER, minDCF and DET operating points.

A trial is accepted when its score is >= theta. The sweep visits theta = lowest score
(accept everything), every midpoint between consecutive distinct scores, and +inf
(accept nothing), so every achievable (FAR, FRR) pair is an operating point.
"""

import logging
from dataclasses import dataclass

import numpy as np

from sta_mdct.errors import ConfigError
from sta_mdct.scoring.trials import ScoreSet

logger = logging.getLogger(__name__)

P_TARGET = 0.05
C_MISS = 1.0
C_FA = 1.0


@dataclass(frozen=True)
class OperatingPoints:
    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(a), float(r)) for t, a, r in zip(self.thresholds, self.far, self.frr, strict=True)]


def sweep_thresholds(scores: np.ndarray) -> np.ndarray:
    distinct = np.unique(scores)
    midpoints = (distinct[:-1] + distinct[1:]) / 2
    return np.concatenate([distinct[:1], midpoints, [np.inf]])


def operating_points(s: ScoreSet) -> OperatingPoints:
    """
    (theta, FAR, FRR) at every sweep threshold, theta ascending.

    Raises:
        UndefinedMetricError: Only one class present.
    """
    s.require_both_classes()
    thresholds = sweep_thresholds(s.scores)
    targets = np.sort(s.targets)
    nontargets = np.sort(s.nontargets)
    # counts of scores strictly below each threshold
    below_target = np.searchsorted(targets, thresholds, side="left")
    below_nontarget = np.searchsorted(nontargets, thresholds, side="left")
    far = (nontargets.size - below_nontarget) / nontargets.size
    frr = below_target / targets.size
    return OperatingPoints(thresholds=thresholds, far=far, frr=frr)


def eer(s: ScoreSet) -> tuple[float, float]:
    """
    Equal error rate and its threshold.

    Walks the sweep until FRR >= FAR. An exact crossing is returned as is; otherwise
    both rates and the threshold are interpolated linearly between the two operating
    points that bracket the crossing. A bracket with an infinite end returns the
    finite threshold.

    Args:
        s (ScoreSet): Scores with both classes present.

    Returns:
        tuple[float, float]: (EER as a fraction, theta).

    Raises:
        UndefinedMetricError: Only one class present.
    """
    points = operating_points(s)
    gap = points.far - points.frr
    k = int(np.argmax(gap <= 0))
    if gap[k] == 0 or k == 0:
        return float(points.far[k]), float(points.thresholds[k])
    lam = gap[k - 1] / (gap[k - 1] - gap[k])
    rate = points.far[k - 1] + lam * (points.far[k] - points.far[k - 1])
    low, high = points.thresholds[k - 1], points.thresholds[k]
    theta = low + lam * (high - low) if np.isfinite(high) else low
    return float(rate), float(theta)


def min_dcf(s: ScoreSet, p_target: float = P_TARGET, c_miss: float = C_MISS, c_fa: float = C_FA) -> float:
    """
    Minimum normalized detection cost over the sweep.

        DCF(theta) = (c_miss * P_miss * p_tar + c_fa * P_fa * (1 - p_tar)) / min(c_miss * p_tar, c_fa * (1 - p_tar))

    Raises:
        ConfigError: p_target outside (0, 1) or non-positive costs.
        UndefinedMetricError: Only one class present.
    """
    if not 0 < p_target < 1:
        raise ConfigError(f"p_target must be in (0, 1), got {p_target}")
    if c_miss <= 0 or c_fa <= 0:
        raise ConfigError(f"costs must be positive, got c_miss={c_miss} c_fa={c_fa}")
    points = operating_points(s)
    cost = c_miss * points.frr * p_target + c_fa * points.far * (1 - p_target)
    return float(np.min(cost) / min(c_miss * p_target, c_fa * (1 - p_target)))
