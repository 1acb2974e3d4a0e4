import pytest

from sta_mdct.errors import ExperimentError
from sta_mdct.nets.serialization import save_model
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.services.experiment import CLEAN, SUMMARY_HEADER, run, run_experiment
from sta_mdct.services.tables import read_table


def _plan(name="toy", **overrides):
    values = {
        "name": name,
        "models": {"A": "models/a.stam", "B": "models/b.stam"},
        "surrogates": ["A", "B"],
        "victims": ["A", "B"],
        "n_train": 2,
        "n_enroll": 2,
        "asv_trials": 6,
        "attack": {"iterations": 2, "n_transforms": 2, "window_length": 64},
        "saliency_trials": 2,
        "saliency_images": 1,
        "snr_budgets": [0.0, 30.0, float("inf")],
        "workers": 2,
    }
    values.update(overrides)
    return ExperimentPlan(**values)


@pytest.fixture
def models(convnet, framenet):
    return {"A": convnet, "B": framenet}


@pytest.mark.slow
def test_asv_campaign_writes_every_output(tiny_corpus, models, tmp_path):
    report = run_experiment(_plan(write_adversarial=True), tiny_corpus, models)
    out = tmp_path / "results" / "toy"
    summary = read_table(out / "summary.csv")

    assert report.out_dir.resolve() == out.resolve()
    assert len(summary) == 2 + 2 * 3 * 2
    assert list(summary[0]) == SUMMARY_HEADER
    assert [r["victim"] for r in summary if r["attacker"] == CLEAN] == ["A", "B"]
    assert {r["white_box"] for r in summary if r["surrogate"] == r["victim"]} == {"true"}

    for name in ("trials.csv", "acceptance.csv", "manifest.txt", "telemetry.prom", "A__sta-mdct__B.csv"):
        assert (out / name).is_file()
    assert (out / "det" / "none__A.csv").is_file()
    assert len(read_table(out / "budget" / "B__fgsm__A.csv")) == 3
    assert (out / "adversarial" / "A__i-fgsm" / "trials.csv").is_file()
    assert (out / "adversarial" / "A__i-fgsm" / "0000.wav").is_file()
    assert list((out / "saliency" / "A").glob("*_clean.pgm"))
    assert not (out / "saliency" / "B").exists()

    checks = {row["check"] for row in read_table(out / "acceptance.csv")}
    assert {"transfer_sta_over_ifgsm", "transfer_ifgsm_over_fgsm", "snr_band", "budget_monotonic"} <= checks


@pytest.mark.slow
def test_reruns_are_byte_identical(tiny_corpus, models, tmp_path):
    run_experiment(_plan("first", attackers=["i-fgsm", "sta-mdct"], saliency=False), tiny_corpus, models)
    run_experiment(_plan("second", attackers=["i-fgsm", "sta-mdct"], saliency=False), tiny_corpus, models)

    for name in ("trials.csv", "summary.csv", "A__sta-mdct__B.csv", "acceptance.csv"):
        assert (tmp_path / "results" / "first" / name).read_bytes() == (
            tmp_path / "results" / "second" / name
        ).read_bytes()


@pytest.mark.slow
def test_identification_campaign(tiny_corpus, models, tmp_path):
    plan = _plan("osi", task="osi", n_enrolled=3, id_trials=3, attackers=["fgsm"], saliency=False)
    run_experiment(plan, tiny_corpus, models)
    summary = read_table(tmp_path / "results" / "osi" / "summary.csv")

    assert len(summary) == 2 + 2 * 2
    assert all(r["eer"] == "" for r in summary)
    assert all(r["tasr"] != "" for r in summary if r["attacker"] != CLEAN)


def test_missing_models_are_reported(tiny_corpus, convnet, tmp_path):
    with pytest.raises(ExperimentError):
        run_experiment(_plan(), tiny_corpus, {"A": convnet})

    save_model(convnet, tmp_path / "models" / "a.stam")
    with pytest.raises(ExperimentError):
        run(_plan())
