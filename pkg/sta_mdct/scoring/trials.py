"""
Trials, score sets and the SNR-budget mixed trial set.

A trial pairs an enrollment (a speaker id for verification, the enrolled set for
identification) with one test utterance. `expected` is the correct decision: "accept"
or "reject" for verification, a speaker id for identification, or None when an
open-set system should reject the speaker as unknown.
"""

import csv
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from sta_mdct.errors import AudioWriteError, ConfigError, CorpusError, ShapeMismatchError, UndefinedMetricError

logger = logging.getLogger(__name__)

ACCEPT = "accept"
REJECT = "reject"


@dataclass(frozen=True)
class Trial:
    index: int
    enroll_id: str
    test_ref: str
    speaker_id: str
    expected: str | None
    attack_target: str | None = None
    adversarial_ref: str | None = None
    adversarial_snr: float | None = None

    def __post_init__(self):
        if (self.adversarial_ref is None) != (self.adversarial_snr is None):
            raise ConfigError(f"trial {self.index}: adversarial_ref and adversarial_snr must be set together")

    @property
    def is_target(self) -> bool:
        """Verification: the test speaker is the enrolled speaker."""
        return self.expected == ACCEPT

    @property
    def is_verification(self) -> bool:
        return self.expected in (ACCEPT, REJECT)

    @property
    def is_adversarial(self) -> bool:
        return self.adversarial_ref is not None

    def with_adversarial(self, ref: str, snr: float, attack_target: str | None = None) -> "Trial":
        return replace(
            self,
            adversarial_ref=ref,
            adversarial_snr=float(snr),
            attack_target=attack_target if attack_target is not None else self.attack_target,
        )


@dataclass(frozen=True)
class ScoreSet:
    """Per-trial similarity scores with target (True) / non-target (False) labels."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        labels = np.asarray(self.labels, dtype=bool).ravel()
        if scores.shape != labels.shape:
            raise ShapeMismatchError(f"{scores.shape[0]} scores for {labels.shape[0]} labels")
        if not np.all(np.isfinite(scores)):
            raise UndefinedMetricError("score set contains non-finite scores")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.scores.shape[0])

    @property
    def targets(self) -> np.ndarray:
        return self.scores[self.labels]

    @property
    def nontargets(self) -> np.ndarray:
        return self.scores[~self.labels]

    def require_both_classes(self) -> None:
        if not self.labels.any() or self.labels.all():
            raise UndefinedMetricError(
                f"need at least one target and one non-target score, got {int(self.labels.sum())} / "
                f"{int((~self.labels).sum())}"
            )


def budget_selection(snrs: Sequence[float], budget: float, group: Iterable[int]) -> np.ndarray:
    """Boolean mask of trials i with p_adv_i >= b and i in G."""
    snrs = np.asarray(snrs, dtype=np.float64)
    in_group = np.zeros(snrs.shape[0], dtype=bool)
    for i in group:
        if not 0 <= i < snrs.shape[0]:
            raise ShapeMismatchError(f"group index {i} outside [0, {snrs.shape[0]})")
        in_group[i] = True
    return in_group & (snrs >= budget)


def mixed_trial_set(
    original: Sequence[Trial], adversarial: Sequence[Trial], budget: float, group: Iterable[int]
) -> list[Trial]:
    """
    Build M(b): trial i is replaced by its adversarial version when p_adv_i >= b and i is in G.

    Args:
        original (Sequence[Trial]): Clean trial set O.
        adversarial (Sequence[Trial]): Index-aligned adversarial set A.
        budget (float): SNR budget b in dB.
        group (Iterable[int]): 0-based indices eligible for replacement (non-targets for
            impersonation, targets for evasion).

    Returns:
        list[Trial]: M(b), same length as O.

    Raises:
        ShapeMismatchError: O and A are not index-aligned.
    """
    if len(original) != len(adversarial):
        raise ShapeMismatchError(f"original has {len(original)} trials, adversarial has {len(adversarial)}")
    for o, a in zip(original, adversarial, strict=True):
        if o.index != a.index or a.adversarial_snr is None:
            raise ShapeMismatchError(f"trial {o.index} has no aligned adversarial counterpart")
    snrs = [a.adversarial_snr for a in adversarial]
    selected = budget_selection(snrs, budget, group)  # type: ignore[arg-type]
    return [a if use else o for o, a, use in zip(original, adversarial, selected, strict=True)]


def mixed_scores(
    clean: np.ndarray, adversarial: np.ndarray, snrs: Sequence[float], budget: float, group: Iterable[int]
) -> np.ndarray:
    """Scores of M(b) from index-aligned clean and adversarial score vectors."""
    clean = np.asarray(clean, dtype=np.float64)
    adversarial = np.asarray(adversarial, dtype=np.float64)
    if clean.shape != adversarial.shape:
        raise ShapeMismatchError(f"clean scores {clean.shape} vs adversarial scores {adversarial.shape}")
    return np.where(budget_selection(snrs, budget, group), adversarial, clean)


_FIELDS = [f.name for f in fields(Trial)]


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(trials: Sequence[Trial], path: Path | str) -> Path:
    """Write trials with a header row; None is written as an empty cell."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(_FIELDS)
            for trial in trials:
                writer.writerow([_cell(getattr(trial, name)) for name in _FIELDS])
    except OSError as e:
        raise AudioWriteError(f"cannot write {path}: {e}") from e
    return path


def read_trials_csv(path: Path | str) -> list[Trial]:
    """
    Read a trial list written by `write_trials_csv`.

    Raises:
        CorpusError: Missing file, missing columns or malformed values.
    """
    path = Path(path)
    try:
        with path.open(newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise CorpusError(f"cannot read trial list {path}: {e}") from e

    trials = []
    for line, row in enumerate(rows, start=2):
        try:
            snr = row["adversarial_snr"]
            trials.append(
                Trial(
                    index=int(row["index"]),
                    enroll_id=row["enroll_id"],
                    test_ref=row["test_ref"],
                    speaker_id=row["speaker_id"],
                    expected=row["expected"] or None,
                    attack_target=row["attack_target"] or None,
                    adversarial_ref=row["adversarial_ref"] or None,
                    adversarial_snr=float(snr) if snr else None,
                )
            )
        except (KeyError, ValueError, ConfigError) as e:
            raise CorpusError(f"{path}:{line}: malformed trial row ({e})") from e
    logger.debug(f"Read {len(trials)} trials from {path}")
    return trials
