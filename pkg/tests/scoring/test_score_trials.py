import numpy as np
import pytest

from sta_mdct.errors import ConfigError, CorpusError, ShapeMismatchError
from sta_mdct.scoring.trials import (
    ACCEPT,
    REJECT,
    Trial,
    budget_selection,
    mixed_scores,
    mixed_trial_set,
    read_trials_csv,
    write_trials_csv,
)
from tests.utils.fixture import write_text

SNRS = [35.0, 45.0, 20.0, 50.0]


def _clean():
    return [Trial(i, "spk00", f"spk0{i}/000.wav", f"spk0{i}", ACCEPT if i == 0 else REJECT) for i in range(4)]


def _adversarial(snrs=SNRS):
    return [t.with_adversarial(f"adv/{t.index}.wav", p, "spk00") for t, p in zip(_clean(), snrs)]


def test_budget_replaces_only_eligible_trials_above_budget():
    mixed = mixed_trial_set(_clean(), _adversarial(), 40.0, {1, 3})

    assert [t.is_adversarial for t in mixed] == [False, True, False, True]
    assert budget_selection(SNRS, 40.0, range(4)).tolist() == [False, True, False, True]
    assert mixed_scores(np.zeros(4), np.ones(4), SNRS, 30.0, {0, 2}).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_unperturbed_trials_survive_an_infinite_budget():
    mixed = mixed_trial_set(_clean(), _adversarial([np.inf, 45.0, 20.0, 50.0]), np.inf, range(4))
    assert [t.is_adversarial for t in mixed] == [True, False, False, False]


def _random_instance(rng):
    n = int(rng.integers(1, 21))
    snrs = [float("inf") if rng.random() < 0.2 else float(rng.integers(0, 61)) for _ in range(n)]
    group = {i for i in range(n) if rng.random() < 0.5}
    clean = [Trial(i, "spk00", f"t{i}.wav", "spk01", REJECT) for i in range(n)]
    adversarial = [t.with_adversarial(f"adv/{t.index}.wav", p, ACCEPT) for t, p in zip(clean, snrs)]
    return clean, adversarial, snrs, group


def test_mixed_set_matches_the_replacement_rule_on_random_instances():
    """Trial i is adversarial in M(b) exactly when i is eligible and its SNR is at least b."""
    rng = np.random.default_rng(17)
    for _ in range(100):
        clean, adversarial, snrs, group = _random_instance(rng)
        budget = float("inf") if rng.random() < 0.2 else float(rng.integers(0, 61))
        mixed = mixed_trial_set(clean, adversarial, budget, group)

        expected = [adversarial[i] if i in group and snrs[i] >= budget else clean[i] for i in range(len(clean))]
        assert mixed == expected


def test_lowering_the_budget_never_drops_an_adversarial_trial():
    rng = np.random.default_rng(23)
    budgets = [float("inf"), *range(60, -1, -5)]
    for _ in range(100):
        clean, adversarial, _, group = _random_instance(rng)
        previous: set[int] = set()
        for budget in budgets:
            replaced = {t.index for t in mixed_trial_set(clean, adversarial, budget, group) if t.is_adversarial}
            assert previous <= replaced
            previous = replaced


def test_mixed_set_requires_alignment():
    with pytest.raises(ShapeMismatchError):
        mixed_trial_set(_clean(), _adversarial()[:3], 40.0, {1})
    with pytest.raises(ShapeMismatchError):
        mixed_trial_set(_clean(), _clean(), 40.0, {1})
    with pytest.raises(ShapeMismatchError):
        budget_selection(SNRS, 40.0, {7})


def test_adversarial_fields_are_set_together():
    with pytest.raises(ConfigError):
        Trial(0, "e", "t", "s", ACCEPT, adversarial_ref="adv.wav")


def test_trial_csv_round_trip(tmp_path):
    trials = _adversarial() + [Trial(4, "*", "spk01/003.wav", "spk01", None)]
    path = write_trials_csv(trials, tmp_path / "trials.csv")
    assert read_trials_csv(path) == trials


def test_malformed_trial_lists(tmp_path):
    with pytest.raises(CorpusError):
        read_trials_csv(tmp_path / "missing.csv")
    bad = write_text(tmp_path / "bad.csv", "index,enroll_id\nzero,spk00\n")
    with pytest.raises(CorpusError):
        read_trials_csv(bad)
