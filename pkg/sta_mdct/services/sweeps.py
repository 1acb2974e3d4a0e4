"""
Sweeps on top of a campaign: SNR-budget curves over mixed trial sets, and one-at-a-time
hyperparameter ablations of the spectrum transformation attack.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sta_mdct.schemas.attack import AttackerKind
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.detection import eer, min_dcf
from sta_mdct.scoring.rates import rates
from sta_mdct.scoring.trials import ScoreSet, mixed_scores
from sta_mdct.services.campaign import (
    ModelContext,
    adversarial_trials,
    evaluate_victim,
    generate,
    labels_of,
    resolve_members,
)
from sta_mdct.services.tables import finite_mean, write_table
from sta_mdct.services.trials import TrialSet

logger = logging.getLogger(__name__)

ABLATION_GRIDS: dict[str, list[float]] = {
    "iterations": [1, 5, 10, 20],
    "n_transforms": [1, 5, 10, 20, 40],
    "sigma": [0.0, 11.0, 22.0, 44.0, 88.0],
    "rho": [0.0, 0.25, 0.5, 0.75, 0.9],
}

BUDGET_HEADER = ["budget_db", "eer_impersonation", "min_dcf_impersonation", "eer_evasion", "min_dcf_evasion"]


@dataclass(frozen=True)
class BudgetPoint:
    budget: float
    eer_impersonation: float
    min_dcf_impersonation: float
    eer_evasion: float
    min_dcf_evasion: float


def budget_curve(
    trialset: TrialSet,
    clean: Sequence[float],
    adversarial: Sequence[float],
    snrs: Sequence[float],
    budgets: Sequence[float],
) -> list[BudgetPoint]:
    """
    EER and minDCF of M(b) for every budget, ascending.

    Impersonation replaces non-target trials (G = non-targets), evasion replaces target
    trials (G = targets); each is scored over the whole mixed set.
    """
    labels = labels_of(trialset)
    clean_scores, adversarial_scores = np.asarray(clean), np.asarray(adversarial)
    points = []
    for b in sorted(budgets):
        imp = ScoreSet(mixed_scores(clean_scores, adversarial_scores, snrs, b, trialset.nontarget_indices), labels)
        eva = ScoreSet(mixed_scores(clean_scores, adversarial_scores, snrs, b, trialset.target_indices), labels)
        points.append(BudgetPoint(b, eer(imp)[0], min_dcf(imp), eer(eva)[0], min_dcf(eva)))
    return points


def write_budget_curve(points: Sequence[BudgetPoint], path: Path) -> Path:
    rows = [(p.budget, p.eer_impersonation, p.min_dcf_impersonation, p.eer_evasion, p.min_dcf_evasion) for p in points]
    return write_table(path, BUDGET_HEADER, rows)


def is_non_increasing(values: Sequence[float], tolerance: float = 1e-12) -> bool:
    return all(b <= a + tolerance for a, b in zip(values, values[1:]))


def run_ablations(
    plan: ExperimentPlan, trialset: TrialSet, contexts: Mapping[str, ModelContext], out_dir: Path
) -> list[Path]:
    """
    Vary one STA-MDCT hyperparameter at a time on the first surrogate.

    Every other parameter stays at the plan's attack config. Only black-box victims are
    scored. Writes `ablation/<param>.csv` with EER (verification) or TASR
    (identification) and the mean SNR per value.

    Returns:
        list[Path]: Written tables.
    """
    surrogate = plan.surrogates[0]
    members = resolve_members(surrogate, contexts)
    victims = [v for v in plan.victims if not plan.is_white_box(surrogate, v)]
    written = []
    for param in plan.ablate:
        rows = []
        for value in ABLATION_GRIDS[param]:
            typed = int(value) if param in ("iterations", "n_transforms") else float(value)
            update: dict = {param: typed}
            if param == "iterations":
                update["alpha"] = None
            cfg = plan.attack.model_copy(update=update)
            logger.info(f"[EXPERIMENT] Ablation {param} = {typed} on {surrogate}")
            generation = generate(plan, trialset, surrogate, members, AttackerKind.STA_MDCT, base=cfg)
            for victim in victims:
                scored = evaluate_victim(contexts[victim], trialset, generation.adversarial)
                if trialset.task == "asv":
                    metric = eer(ScoreSet(np.array([s[0] for s in scored.scores]), labels_of(trialset)))[0]
                else:
                    metric = rates(adversarial_trials(trialset, generation), scored.decisions).tasr
                rows.append((param, typed, surrogate, victim, metric, finite_mean(generation.snrs)))
        header = ["param", "value", "surrogate", "victim", "eer" if trialset.task == "asv" else "tasr", "snr_db"]
        written.append(write_table(out_dir / "ablation" / f"{param}.csv", header, rows))
    return written
