from sta_mdct.scoring.detection import eer, min_dcf, operating_points
from sta_mdct.scoring.quality import l2, l2_raw, snr
from sta_mdct.scoring.rates import RateReport, rates
from sta_mdct.scoring.trials import ScoreSet, Trial, mixed_trial_set

__all__ = [
    "RateReport",
    "ScoreSet",
    "Trial",
    "eer",
    "l2",
    "l2_raw",
    "min_dcf",
    "mixed_trial_set",
    "operating_points",
    "rates",
    "snr",
]
