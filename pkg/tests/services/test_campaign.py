import numpy as np

from sta_mdct.audio.wav import read_wav, write_wav
from sta_mdct.schemas.attack import AttackerKind
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.scoring.quality import snr
from sta_mdct.services.campaign import evaluate_victim, generate, prepare_model
from sta_mdct.services.trials import build_trials


def _plan(**overrides):
    values = {
        "models": {"A": "a.stam", "B": "b.stam"},
        "surrogates": ["A"],
        "victims": ["B"],
        "n_train": 2,
        "n_enroll": 2,
        "asv_trials": 4,
        "attack": {"iterations": 2, "window_length": 64},
        "budget_epsilons": [2.5, 40.0],
        "workers": 2,
    }
    values.update(overrides)
    return ExperimentPlan(**values)


def test_generated_examples_are_integer_and_inside_the_ball(tiny_corpus, convnet):
    plan = _plan()
    trialset = build_trials(plan, tiny_corpus)
    ctx = prepare_model("A", convnet, trialset)
    generation = generate(plan, trialset, "A", [ctx], AttackerKind.IFGSM)

    assert generation.epsilons == [2.5, 40.0, 2.5, 40.0]
    for trial, x_adv, eps, trial_snr in zip(
        trialset.trials, generation.adversarial, generation.epsilons, generation.snrs, strict=True
    ):
        x = trialset.samples(trial)
        assert np.array_equal(x_adv, np.round(x_adv))
        assert np.max(np.abs(x_adv - x)) <= eps
        assert trial_snr == snr(x, x_adv)


def test_victims_score_what_is_written_to_disk(tiny_corpus, convnet, framenet, tmp_path):
    """Re-reading the WAV files gives the exact victim scores of the campaign."""
    plan = _plan(budget_epsilons=None)
    trialset = build_trials(plan, tiny_corpus)
    surrogate, victim = prepare_model("A", convnet, trialset), prepare_model("B", framenet, trialset)
    generation = generate(plan, trialset, "A", [surrogate], AttackerKind.FGSM)

    reread = []
    for trial, x_adv in zip(trialset.trials, generation.adversarial, strict=True):
        write_wav(tmp_path / f"{trial.index}.wav", x_adv)
        reread.append(read_wav(tmp_path / f"{trial.index}.wav").samples)

    in_memory = evaluate_victim(victim, trialset, generation.adversarial)
    from_disk = evaluate_victim(victim, trialset, reread)
    assert all(np.array_equal(a, b) for a, b in zip(in_memory.scores, from_disk.scores, strict=True))
    assert in_memory.decisions == from_disk.decisions
