"""
Campaign building blocks: per-model enrollment and calibration, adversarial generation
on surrogates, and victim scoring.

Generation only receives `Surrogate` handles built from surrogate models; victims are
touched exclusively by `evaluate_victim`, after generation has finished.
"""

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from sta_mdct.attacks.common import Surrogate, quantize_within_ball
from sta_mdct.attacks.objectives import AttackObjective, Task, decide
from sta_mdct.attacks.registry import run_attack
from sta_mdct.errors import ExperimentError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.nets.speakers import SpeakerProfile, enroll, profile_matrix
from sta_mdct.schemas.attack import AttackConfig, AttackerKind
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.quality import l2, l2_raw, snr
from sta_mdct.scoring.trials import ACCEPT, Trial
from sta_mdct.services.calibration import calibrate_identification, threshold_at_eer
from sta_mdct.services.trials import TrialSet
from sta_mdct.telemetry import trials_evaluated_total
from sta_mdct.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

ENSEMBLE_SEPARATOR = "+"


@dataclass
class ModelContext:
    """A model with its enrollment, frozen threshold and clean trial scores."""

    name: str
    model: EmbeddingModel
    profiles: dict[str, SpeakerProfile]
    enrolled: tuple[SpeakerProfile, ...]
    threshold: float | None = None
    clean_scores: list[np.ndarray] = field(default_factory=list)

    def matrix(self) -> np.ndarray:
        return profile_matrix(self.enrolled)


@dataclass
class Generation:
    """Adversarial examples of one (surrogate, attacker) pair, index-aligned with the trials."""

    surrogate: str
    attacker: AttackerKind
    adversarial: list[np.ndarray]
    snrs: list[float]
    l2: list[float]
    l2_raw: list[float]
    epsilons: list[float]


@dataclass
class VictimScores:
    victim: str
    scores: list[np.ndarray]
    decisions: list[str | None]


def surrogate_members(name: str) -> list[str]:
    """`a+b` names an ensemble of models a and b."""
    return name.split(ENSEMBLE_SEPARATOR)


def trial_scores(ctx: ModelContext, trialset: TrialSet, trial: Trial, embedding: np.ndarray) -> np.ndarray:
    """ASV: the single score against the trial's enrollment. Identification: scores over the enrolled set."""
    if trialset.task == "asv":
        return np.array([float(np.dot(ctx.profiles[trial.enroll_id].embedding, embedding))])
    return ctx.matrix() @ embedding


def decision_label(ctx: ModelContext, task: str, scores: np.ndarray) -> str | None:
    """Victim decision as a trial label: accept/reject, a speaker id, or None (unknown)."""
    if task == "asv":
        return str(decide(Task.ASV_IMPERSONATION, scores, ctx.threshold))
    decision = decide(Task(task), scores, ctx.threshold)
    return None if decision is None else ctx.enrolled[int(decision)].speaker_id


def prepare_model(name: str, model: EmbeddingModel, trialset: TrialSet) -> ModelContext:
    """
    Enroll every enrolled speaker, score the clean trials and calibrate theta.

    ASV thresholds sit at the EER of the clean trial scores; OSI thresholds at the EER
    of the clean calibration utterances. CSI needs none.
    """
    profiles = {s: enroll(model, [u.samples for u in trialset.enrollment[s]], s) for s in trialset.enrolled}
    ctx = ModelContext(name, model, profiles, tuple(profiles[s] for s in trialset.enrolled))
    ctx.clean_scores = [
        trial_scores(ctx, trialset, t, model.forward(trialset.samples(t))[0]) for t in trialset.trials
    ]
    if trialset.task == "asv":
        ctx.threshold = threshold_at_eer(
            [float(s[0]) for s in ctx.clean_scores], [t.expected == ACCEPT for t in trialset.trials]
        )
        logger.info(f"[EXPERIMENT] {name}: ASV threshold {ctx.threshold:.4f}")
    elif trialset.task == "osi":
        ctx.threshold = calibrate_identification(model, ctx.enrolled, trialset.calibration)
    return ctx


def trial_objective(ctx: ModelContext, trialset: TrialSet, trial: Trial) -> AttackObjective:
    """Objective of one trial on one surrogate, built from that surrogate's own profiles."""
    if trialset.task == "asv":
        task = Task.ASV_EVASION if trial.expected == ACCEPT else Task.ASV_IMPERSONATION
        return AttackObjective(task, (ctx.profiles[trial.enroll_id],), 0, ctx.threshold)
    target = [p.speaker_id for p in ctx.enrolled].index(str(trial.attack_target))
    return AttackObjective(Task(trialset.task), ctx.enrolled, target, ctx.threshold)


def trial_config(plan: ExperimentPlan, base: AttackConfig, attacker: AttackerKind, trial: Trial) -> AttackConfig:
    """Per-trial config: attacker, seed derived from the trial index and the budget epsilon."""
    update: dict = {"attacker": attacker, "seed": derive_seed(plan.seed, trial.index)}
    if plan.budget_epsilons:
        update["epsilon"] = plan.budget_epsilons[trial.index % len(plan.budget_epsilons)]
    return base.model_copy(update=update)


def generate(
    plan: ExperimentPlan,
    trialset: TrialSet,
    surrogate: str,
    members: Sequence[ModelContext],
    attacker: AttackerKind,
    base: AttackConfig | None = None,
) -> Generation:
    """
    Attack every trial on the surrogate (or surrogate ensemble).

    Trials run on a thread pool; results come back in trial order. Examples are rounded to
    integer samples inside their epsilon-ball here; victim scores and distortion figures
    come from exactly the waveforms that get written as WAV.
    """
    base = base or plan.attack

    def attack_one(trial: Trial) -> np.ndarray:
        x = trialset.samples(trial)
        cfg = trial_config(plan, base, attacker, trial)
        handles = [Surrogate(m.model, trial_objective(m, trialset, trial), m.name) for m in members]
        return quantize_within_ball(run_attack(x, handles, cfg).adversarial, x, cfg.epsilon)

    logger.info(f"[EXPERIMENT] Generating {attacker.value} examples on {surrogate} for {len(trialset)} trials")
    with ThreadPoolExecutor(max_workers=plan.workers) as pool:
        adversarial = list(pool.map(attack_one, trialset.trials))

    clean = [trialset.samples(t) for t in trialset.trials]
    return Generation(
        surrogate=surrogate,
        attacker=attacker,
        adversarial=adversarial,
        snrs=[snr(x, a) for x, a in zip(clean, adversarial, strict=True)],
        l2=[l2(x, a) for x, a in zip(clean, adversarial, strict=True)],
        l2_raw=[l2_raw(x, a) for x, a in zip(clean, adversarial, strict=True)],
        epsilons=[trial_config(plan, base, attacker, t).epsilon for t in trialset.trials],
    )


def evaluate_victim(ctx: ModelContext, trialset: TrialSet, inputs: Sequence[np.ndarray]) -> VictimScores:
    """Score (adversarial) inputs on a victim and take its decisions."""
    scores, decisions = [], []
    for trial, x in zip(trialset.trials, inputs, strict=True):
        s = trial_scores(ctx, trialset, trial, ctx.model.forward(x)[0])
        scores.append(s)
        decisions.append(decision_label(ctx, trialset.task, s))
        trials_evaluated_total.labels(victim=ctx.name).inc()
    return VictimScores(ctx.name, scores, decisions)


def clean_decisions(ctx: ModelContext, trialset: TrialSet) -> list[str | None]:
    return [decision_label(ctx, trialset.task, s) for s in ctx.clean_scores]


def resolve_members(name: str, contexts: Mapping[str, ModelContext]) -> list[ModelContext]:
    try:
        return [contexts[m] for m in surrogate_members(name)]
    except KeyError as e:
        raise ExperimentError(f"surrogate '{name}' references an unknown model {e}") from e


def labels_of(trialset: TrialSet) -> np.ndarray:
    return np.array([t.expected == ACCEPT for t in trialset.trials])


def cell_name(surrogate: str, attacker: AttackerKind, victim: str | None = None) -> str:
    parts = [surrogate, attacker.value] + ([victim] if victim else [])
    return "__".join(parts)


def adversarial_trials(trialset: TrialSet, generation: Generation) -> list[Trial]:
    """The trial set with each trial pointing at its adversarial example."""
    prefix = cell_name(generation.surrogate, generation.attacker)
    return [
        t.with_adversarial(f"{prefix}/{t.index:04d}.wav", p)
        for t, p in zip(trialset.trials, generation.snrs, strict=True)
    ]
