"""
Trial-set construction for verification and identification campaigns.

Per speaker, the corpus is split by utterance order: the first `n_train` utterances
are reserved for model training, the next `n_enroll` enroll the speaker and the rest
are test utterances.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sta_mdct.errors import CorpusError
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.trials import ACCEPT, REJECT, Trial
from sta_mdct.training.corpus import Corpus, Utterance
from sta_mdct.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

ALL_ENROLLED = "*"
TRIALS_STREAM = 1


@dataclass
class TrialSet:
    """Trials plus the utterances they reference."""

    task: str
    trials: list[Trial]
    enrolled: list[str]
    enrollment: dict[str, list[Utterance]]
    tests: dict[str, Utterance] = field(default_factory=dict)
    calibration: dict[str, list[Utterance]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.trials)

    def samples(self, trial: Trial) -> np.ndarray:
        return self.tests[trial.test_ref].samples

    @property
    def target_indices(self) -> list[int]:
        return [t.index for t in self.trials if t.expected == ACCEPT]

    @property
    def nontarget_indices(self) -> list[int]:
        return [t.index for t in self.trials if t.expected == REJECT]


def _split(corpus: Corpus, plan: ExperimentPlan) -> tuple[dict[str, list[Utterance]], dict[str, list[Utterance]]]:
    enrollment: dict[str, list[Utterance]] = {}
    tests: dict[str, list[Utterance]] = {}
    for speaker, utts in corpus.by_speaker().items():
        enroll = utts[plan.n_train : plan.n_train + plan.n_enroll]
        rest = utts[plan.n_train + plan.n_enroll :]
        if len(enroll) < plan.n_enroll or not rest:
            raise CorpusError(
                f"speaker {speaker} has {len(utts)} utterances; need more than "
                f"{plan.n_train + plan.n_enroll} (n_train + n_enroll) to leave test utterances"
            )
        enrollment[speaker], tests[speaker] = enroll, rest
    return enrollment, tests


def _asv_trials(
    plan: ExperimentPlan, speakers: list[str], tests: dict[str, list[Utterance]], rng: np.random.Generator
) -> list[Trial]:
    n_target = plan.asv_trials // 2
    n_nontarget = plan.asv_trials - n_target
    trials = []
    for i in range(n_target):
        speaker = speakers[int(rng.integers(len(speakers)))]
        utt = tests[speaker][int(rng.integers(len(tests[speaker])))]
        trials.append(Trial(i, speaker, utt.ref, speaker, ACCEPT, attack_target=REJECT))
    for i in range(n_target, n_target + n_nontarget):
        enroll = speakers[int(rng.integers(len(speakers)))]
        others = [s for s in speakers if s != enroll]
        speaker = others[int(rng.integers(len(others)))]
        utt = tests[speaker][int(rng.integers(len(tests[speaker])))]
        trials.append(Trial(i, enroll, utt.ref, speaker, REJECT, attack_target=ACCEPT))
    return trials


def _identification_trials(
    plan: ExperimentPlan, enrolled: list[str], pool: list[Utterance], open_set: bool, rng: np.random.Generator
) -> list[Trial]:
    trials = []
    for i in range(plan.id_trials):
        utt = pool[int(rng.integers(len(pool)))]
        candidates = [s for s in enrolled if s != utt.speaker_id]
        target = candidates[int(rng.integers(len(candidates)))]
        expected = None if open_set else utt.speaker_id
        trials.append(Trial(i, ALL_ENROLLED, utt.ref, utt.speaker_id, expected, attack_target=target))
    return trials


def build_trials(plan: ExperimentPlan, corpus: Corpus) -> TrialSet:
    """
    Draw the plan's trial set from the corpus.

    ASV: `asv_trials` trials, the first half target and the rest non-target, every
    speaker enrolled. CSI: the first `n_enrolled` speakers are enrolled and tests are
    drawn from their test utterances, each with an attack target other than the true
    speaker. OSI: same enrollment, tests drawn only from the remaining speakers.

    Args:
        plan (ExperimentPlan): Plan with task, counts and seed.
        corpus (Corpus): Source corpus.

    Returns:
        TrialSet: Trials and the utterances they reference.

    Raises:
        CorpusError: The corpus cannot satisfy the requested counts.
    """
    rng = make_rng(derive_seed(plan.seed, TRIALS_STREAM))
    enrollment, tests = _split(corpus, plan)
    speakers = list(enrollment)
    if len(speakers) < 2:
        raise CorpusError(f"need at least 2 speakers, corpus has {len(speakers)}")

    if plan.task == "asv":
        enrolled = speakers
        trials = _asv_trials(plan, speakers, tests, rng)
        calibration: dict[str, list[Utterance]] = {}
    else:
        if len(speakers) < plan.n_enrolled + (1 if plan.task == "osi" else 0):
            given = len(speakers)
            raise CorpusError(f"{plan.task} with R={plan.n_enrolled} needs more speakers than the {given} given")
        enrolled = speakers[: plan.n_enrolled]
        outsiders = speakers[plan.n_enrolled :]
        source = outsiders if plan.task == "osi" else enrolled
        pool = [u for s in source for u in tests[s]]
        trials = _identification_trials(plan, enrolled, pool, plan.task == "osi", rng)
        calibration = {s: tests[s] for s in speakers}

    referenced = {u.ref: u for utts in tests.values() for u in utts}
    used = {t.test_ref: referenced[t.test_ref] for t in trials}
    logger.info(f"[EXPERIMENT] Built {len(trials)} {plan.task} trials over {len(enrolled)} enrolled speakers")
    return TrialSet(
        task=plan.task,
        trials=trials,
        enrolled=enrolled,
        enrollment={s: enrollment[s] for s in enrolled},
        tests=used,
        calibration=calibration,
    )
