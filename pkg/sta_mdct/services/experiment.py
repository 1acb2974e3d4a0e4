"""
Experiment runner: every (surrogate, attacker, victim) cell of a plan, end to end.

Output tree under `<output_dir>/<name>/`:

    trials.csv                               clean trial list
    <surrogate>__<attacker>__<victim>.csv    per-trial scores and decisions of one cell
    summary.csv                              one row per cell, plus clean rows (attacker "none")
    det/<cell>.csv                           (theta, FAR, FRR) operating points (verification)
    budget/<cell>.csv                        EER/minDCF of the mixed trial set vs SNR budget
    saliency/<victim>/*.pgm                  before/after Layer-CAM maps (conv victims)
    ablation/<param>.csv                     one-at-a-time hyperparameter sweeps
    acceptance.csv                           directional checks, reported not raised
    manifest.txt                             the resolved plan plus fingerprints
    telemetry.prom                           Prometheus registry dump (not reproducible)
"""

import logging
import time
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from sta_mdct.audio.wav import write_wav
from sta_mdct.errors import ExperimentError, StaMdctError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.nets.serialization import load_model
from sta_mdct.saliency.layer_cam import layer_cam, saliency_shift
from sta_mdct.saliency.render import render
from sta_mdct.schemas.attack import AttackerKind
from sta_mdct.schemas.corpus import CorpusSpec
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.detection import eer, min_dcf, operating_points
from sta_mdct.scoring.rates import rates
from sta_mdct.scoring.trials import ScoreSet, write_trials_csv
from sta_mdct.services.campaign import (
    Generation,
    ModelContext,
    VictimScores,
    adversarial_trials,
    cell_name,
    clean_decisions,
    evaluate_victim,
    generate,
    labels_of,
    prepare_model,
    resolve_members,
    surrogate_members,
)
from sta_mdct.services.manifest import file_hash, write_manifest
from sta_mdct.services.sweeps import budget_curve, is_non_increasing, run_ablations, write_budget_curve
from sta_mdct.services.tables import finite_mean, write_table
from sta_mdct.services.trials import TrialSet, build_trials
from sta_mdct.telemetry import dump_registry, errors_total, experiment_duration_seconds, experiments_active
from sta_mdct.training.corpus import Corpus, load_corpus, synth_corpus

logger = logging.getLogger(__name__)

CLEAN = "none"
SNR_BAND = (30.0, 40.0)
BAND_EPSILON = 40.0
TRANSFER_MARGIN = 0.02

SUMMARY_HEADER = [
    "surrogate",
    "attacker",
    "victim",
    "white_box",
    "eer",
    "min_dcf",
    "tasr",
    "far",
    "ier",
    "snr_db",
    "l2",
    "l2_raw",
    "saliency_shift_truth",
    "saliency_shift_target",
    "trials",
]
CELL_HEADER = [
    "index",
    "enroll_id",
    "speaker_id",
    "expected",
    "attack_target",
    "epsilon",
    "clean_score",
    "adversarial_score",
    "decision",
    "snr_db",
    "l2",
    "l2_raw",
]
ACCEPTANCE_HEADER = ["check", "subject", "value", "expected", "passed"]


@dataclass
class ExperimentReport:
    out_dir: Path
    summary: list[dict[str, Any]] = field(default_factory=list)
    acceptance: list[tuple] = field(default_factory=list)
    budget_curves: dict[str, list] = field(default_factory=dict)


def _target_score(trialset: TrialSet, ctx: ModelContext, trial_index: int, scores: np.ndarray) -> float:
    """Verification: the trial score. Identification: the score of the attack target."""
    if trialset.task == "asv":
        return float(scores[0])
    target = str(trialset.trials[trial_index].attack_target)
    return float(scores[[p.speaker_id for p in ctx.enrolled].index(target)])


def _verification_scores(scored: list[np.ndarray]) -> np.ndarray:
    return np.array([float(s[0]) for s in scored])


def _clean_row(trialset: TrialSet, ctx: ModelContext) -> dict[str, Any]:
    report = rates(trialset.trials, clean_decisions(ctx, trialset))
    row: dict[str, Any] = {"surrogate": "", "attacker": CLEAN, "victim": ctx.name, "white_box": False}
    if trialset.task == "asv":
        clean = ScoreSet(_verification_scores(ctx.clean_scores), labels_of(trialset))
        row.update(eer=eer(clean)[0], min_dcf=min_dcf(clean))
    row.update(far=report.far, ier=report.ier, trials=len(trialset))
    return row


def _cell_row(
    plan: ExperimentPlan, trialset: TrialSet, generation: Generation, victim: ModelContext, scored: VictimScores
) -> dict[str, Any]:
    report = rates(adversarial_trials(trialset, generation), scored.decisions)
    row: dict[str, Any] = {
        "surrogate": generation.surrogate,
        "attacker": generation.attacker.value,
        "victim": victim.name,
        "white_box": plan.is_white_box(generation.surrogate, victim.name),
        "tasr": report.tasr,
        "far": report.far,
        "ier": report.ier,
        "snr_db": finite_mean(generation.snrs),
        "l2": float(np.mean(generation.l2)),
        "l2_raw": float(np.mean(generation.l2_raw)),
        "trials": len(trialset),
    }
    if trialset.task == "asv":
        adversarial = ScoreSet(_verification_scores(scored.scores), labels_of(trialset))
        row.update(eer=eer(adversarial)[0], min_dcf=min_dcf(adversarial))
    return row


def _write_cell(
    path: Path, trialset: TrialSet, generation: Generation, victim: ModelContext, scored: VictimScores
) -> None:
    rows = []
    for i, trial in enumerate(trialset.trials):
        rows.append(
            (
                trial.index,
                trial.enroll_id,
                trial.speaker_id,
                trial.expected,
                trial.attack_target,
                generation.epsilons[i],
                _target_score(trialset, victim, i, victim.clean_scores[i]),
                _target_score(trialset, victim, i, scored.scores[i]),
                scored.decisions[i],
                generation.snrs[i],
                generation.l2[i],
                generation.l2_raw[i],
            )
        )
    write_table(path, CELL_HEADER, rows)


def _write_det(path: Path, trialset: TrialSet, scores: list[np.ndarray]) -> None:
    points = operating_points(ScoreSet(_verification_scores(scores), labels_of(trialset)))
    write_table(path, ["threshold", "far", "frr"], points.rows())


def _write_adversarial(out_dir: Path, trialset: TrialSet, generation: Generation) -> None:
    pointed = adversarial_trials(trialset, generation)
    for adv_trial, x_adv in zip(pointed, generation.adversarial, strict=True):
        write_wav(out_dir / "adversarial" / str(adv_trial.adversarial_ref), x_adv)
    cell = cell_name(generation.surrogate, generation.attacker)
    write_trials_csv(pointed, out_dir / "adversarial" / cell / "trials.csv")


def _saliency(
    plan: ExperimentPlan, trialset: TrialSet, victim: ModelContext, generation: Generation, out_dir: Path
) -> tuple[float | None, float | None]:
    """Mean clean-vs-adversarial saliency shift w.r.t. the true speaker and the attack target."""
    if not plan.saliency or victim.model.last_conv is None:
        return None, None
    shifts: dict[str, list[float]] = {"truth": [], "target": []}
    cell = cell_name(generation.surrogate, generation.attacker, victim.name)
    for k, trial in enumerate(trialset.trials[: plan.saliency_trials]):
        target_id = trial.enroll_id if trialset.task == "asv" else str(trial.attack_target)
        for role, speaker in (("truth", trial.speaker_id), ("target", target_id)):
            profile = victim.profiles.get(speaker)
            if profile is None:
                continue
            before = layer_cam(victim.model, trialset.samples(trial), profile)
            after = layer_cam(victim.model, generation.adversarial[k], profile)
            shifts[role].append(saliency_shift(before, after))
            if k < plan.saliency_images:
                stem = out_dir / "saliency" / victim.name / f"{cell}__{trial.index:04d}_{role}"
                render(before, stem.with_name(stem.name + "_clean.pgm"))
                render(after, stem.with_name(stem.name + "_adv.pgm"))
    truth, target = finite_mean(shifts["truth"]), finite_mean(shifts["target"])
    logger.info(f"[SALIENCY] {cell}: mean shift truth={truth} target={target}")
    return truth, target


def _acceptance(plan: ExperimentPlan, summary: list[dict[str, Any]], curves: Mapping[str, list]) -> list[tuple]:
    """Directional checks over black-box cells."""
    rows: list[tuple] = []
    metric = "eer" if plan.task == "asv" else "tasr"
    cells = {(r["surrogate"], r["attacker"], r["victim"]): r for r in summary if r["attacker"] != CLEAN}

    def value(surrogate: str, attacker: AttackerKind, victim: str, key: str) -> float | None:
        row = cells.get((surrogate, attacker.value, victim))
        return None if row is None else row.get(key)

    for surrogate in plan.surrogates:
        for victim in plan.victims:
            if plan.is_white_box(surrogate, victim):
                continue
            subject = f"{surrogate}->{victim}"
            sta = value(surrogate, AttackerKind.STA_MDCT, victim, metric)
            ifgsm = value(surrogate, AttackerKind.IFGSM, victim, metric)
            fgsm = value(surrogate, AttackerKind.FGSM, victim, metric)
            if sta is not None and ifgsm is not None:
                passed = sta >= ifgsm + TRANSFER_MARGIN
                rows.append(("transfer_sta_over_ifgsm", subject, sta - ifgsm, f">= {TRANSFER_MARGIN}", passed))
            if ifgsm is not None and fgsm is not None:
                rows.append(("transfer_ifgsm_over_fgsm", subject, ifgsm - fgsm, ">= 0", ifgsm >= fgsm))
            sta_shift = value(surrogate, AttackerKind.STA_MDCT, victim, "saliency_shift_truth")
            ifgsm_shift = value(surrogate, AttackerKind.IFGSM, victim, "saliency_shift_truth")
            if sta_shift is not None and ifgsm_shift is not None:
                passed = sta_shift > ifgsm_shift
                rows.append(("saliency_shift_direction", subject, sta_shift - ifgsm_shift, "> 0", passed))

    if plan.budget_epsilons is None and plan.attack.epsilon == BAND_EPSILON:
        for (surrogate, attacker, victim), row in cells.items():
            snr_db = row["snr_db"]
            ok = snr_db is not None and SNR_BAND[0] <= snr_db <= SNR_BAND[1]
            band = f"[{SNR_BAND[0]}, {SNR_BAND[1]}]"
            rows.append(("snr_band", f"{surrogate}__{attacker}__{victim}", snr_db, band, ok))

    for cell, points in curves.items():
        rows.append(
            (
                "budget_monotonic",
                cell,
                None,
                "non-increasing",
                is_non_increasing([p.eer_impersonation for p in points])
                and is_non_increasing([p.eer_evasion for p in points]),
            )
        )
    for check, subject, measured, expected, passed in rows:
        log = logger.info if passed else logger.warning
        log(f"[EXPERIMENT] acceptance {check} {subject}: {measured} (expected {expected}) -> {passed}")
    return rows


def run_experiment(
    plan: ExperimentPlan,
    corpus: Corpus,
    models: Mapping[str, EmbeddingModel],
    model_hashes: Mapping[str, str] | None = None,
) -> ExperimentReport:
    """
    Run every cell of `plan` on an already loaded corpus and model set.

    Args:
        plan (ExperimentPlan): Validated plan.
        corpus (Corpus): Corpus the trials are drawn from.
        models (Mapping[str, EmbeddingModel]): Every model the plan names.
        model_hashes (Mapping[str, str] | None): File fingerprints for the manifest.

    Returns:
        ExperimentReport: Output directory, summary rows and acceptance checks.

    Raises:
        ExperimentError: A named model is missing.
        InvariantViolation: An adversarial example left the epsilon-ball.
    """
    out_dir = Path(plan.output_dir) / plan.name
    report = ExperimentReport(out_dir)
    names = list(dict.fromkeys([m for s in plan.surrogates for m in surrogate_members(s)] + plan.victims))
    missing = [n for n in names if n not in models]
    if missing:
        raise ExperimentError(f"missing trained models: {missing}")

    logger.info(f"[EXPERIMENT] Starting '{plan.name}' ({plan.task}) -> {out_dir}")
    experiments_active.inc()
    start_time = time.time()
    try:
        trialset = build_trials(plan, corpus)
        write_trials_csv(trialset.trials, out_dir / "trials.csv")
        contexts = {n: prepare_model(n, models[n], trialset) for n in names}

        for victim in plan.victims:
            report.summary.append(_clean_row(trialset, contexts[victim]))
            if trialset.task == "asv":
                _write_det(out_dir / "det" / f"{CLEAN}__{victim}.csv", trialset, contexts[victim].clean_scores)

        for surrogate in plan.surrogates:
            members = resolve_members(surrogate, contexts)
            for attacker in plan.attackers:
                generation = generate(plan, trialset, surrogate, members, attacker)
                if plan.write_adversarial:
                    _write_adversarial(out_dir, trialset, generation)
                for victim in plan.victims:
                    ctx = contexts[victim]
                    cell = cell_name(surrogate, attacker, victim)
                    scored = evaluate_victim(ctx, trialset, generation.adversarial)
                    row = _cell_row(plan, trialset, generation, ctx, scored)
                    row["saliency_shift_truth"], row["saliency_shift_target"] = _saliency(
                        plan, trialset, ctx, generation, out_dir
                    )
                    _write_cell(out_dir / f"{cell}.csv", trialset, generation, ctx, scored)
                    if trialset.task == "asv":
                        _write_det(out_dir / "det" / f"{cell}.csv", trialset, scored.scores)
                        points = budget_curve(
                            trialset,
                            _verification_scores(ctx.clean_scores),
                            _verification_scores(scored.scores),
                            generation.snrs,
                            plan.snr_budgets,
                        )
                        write_budget_curve(points, out_dir / "budget" / f"{cell}.csv")
                        report.budget_curves[cell] = points
                    report.summary.append(row)
                    logger.info(f"[EXPERIMENT] {cell}: {row}")

        summary_rows = [[r.get(k) for k in SUMMARY_HEADER] for r in report.summary]
        write_table(out_dir / "summary.csv", SUMMARY_HEADER, summary_rows)
        report.acceptance = _acceptance(plan, report.summary, report.budget_curves)
        write_table(out_dir / "acceptance.csv", ACCEPTANCE_HEADER, report.acceptance)
        if plan.ablate:
            run_ablations(plan, trialset, contexts, out_dir)
        write_manifest(plan, out_dir, corpus, model_hashes)
    except StaMdctError as e:
        errors_total.labels(error_type=type(e).__name__, component="experiment").inc()
        logger.error(f"[EXPERIMENT] '{plan.name}' failed: {e}")
        raise
    finally:
        experiments_active.dec()
        experiment_duration_seconds.observe(time.time() - start_time)

    dump_registry(out_dir / "telemetry.prom")
    logger.info(f"[EXPERIMENT] Finished '{plan.name}' in {time.time() - start_time:.1f}s")
    return report


def load_plan_corpus(plan: ExperimentPlan) -> Corpus:
    """The plan's WAV corpus, or the synthetic corpus its size fields describe."""
    if plan.corpus_dir:
        return load_corpus(plan.corpus_dir)
    spec = CorpusSpec(n_speakers=plan.n_speakers, utterances_per_speaker=plan.utterances_per_speaker, seed=plan.seed)
    return synth_corpus(spec)


def run(plan: ExperimentPlan) -> ExperimentReport:
    """
    Load the plan's corpus and model files, then run it.

    Raises:
        ExperimentError: A model file named in the plan does not exist.
    """
    names = list(dict.fromkeys([m for s in plan.surrogates for m in surrogate_members(s)] + plan.victims))
    models, hashes = {}, {}
    for name in names:
        path = Path(plan.models[name])
        if not path.is_file():
            errors_total.labels(error_type="ExperimentError", component="experiment").inc()
            raise ExperimentError(f"missing trained model '{name}': {path} does not exist")
        models[name] = load_model(path)
        hashes[name] = file_hash(path)
    return run_experiment(plan, load_plan_corpus(plan), models, hashes)
