"""
Decision-count rates. Each rate is None when its denominator is empty.

    FAR   accepted trials that should be rejected / trials that should be rejected
    TASR  adversarial trials decided as their attack target / adversarial trials
    IER   misidentified identification trials / identification trials
"""

from collections.abc import Sequence
from dataclasses import dataclass

from sta_mdct.errors import ShapeMismatchError
from sta_mdct.scoring.trials import ACCEPT, REJECT, Trial

Decision = str | int | None


@dataclass(frozen=True)
class RateReport:
    far: float | None
    tasr: float | None
    ier: float | None


def ratio(numerator: int, denominator: int) -> float | None:
    return numerator / denominator if denominator else None


def _accepted(decision: Decision) -> bool:
    return decision is not None and decision != REJECT


def false_acceptance_rate(trials: Sequence[Trial], decisions: Sequence[Decision]) -> float | None:
    should_reject = [d for t, d in zip(trials, decisions, strict=True) if t.expected in (REJECT, None)]
    return ratio(sum(_accepted(d) for d in should_reject), len(should_reject))


def targeted_success_rate(trials: Sequence[Trial], decisions: Sequence[Decision]) -> float | None:
    attacked = [(t, d) for t, d in zip(trials, decisions, strict=True) if t.is_adversarial]
    return ratio(sum(d == t.attack_target for t, d in attacked), len(attacked))


def identification_error_rate(trials: Sequence[Trial], decisions: Sequence[Decision]) -> float | None:
    identified = [(t, d) for t, d in zip(trials, decisions, strict=True) if t.expected not in (ACCEPT, REJECT)]
    return ratio(sum(d != t.expected for t, d in identified), len(identified))


def rates(trials: Sequence[Trial], decisions: Sequence[Decision]) -> RateReport:
    """
    FAR, TASR and IER of one decision table.

    Args:
        trials (Sequence[Trial]): Trials, in decision order.
        decisions (Sequence[Decision]): "accept"/"reject" for verification trials, a
            speaker id or None (rejected as unknown) for identification trials.

    Returns:
        RateReport: Each rate in [0, 1], or None when undefined.

    Raises:
        ShapeMismatchError: Lengths differ.
    """
    if len(trials) != len(decisions):
        raise ShapeMismatchError(f"{len(trials)} trials but {len(decisions)} decisions")
    return RateReport(
        far=false_acceptance_rate(trials, decisions),
        tasr=targeted_success_rate(trials, decisions),
        ier=identification_error_rate(trials, decisions),
    )
