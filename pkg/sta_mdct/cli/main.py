"""
`sta-mdct` command line: one binary, one subcommand per pipeline stage.

Config-backed subcommands read a `key = value` file (`--config`, `--spec` or `--plan`)
and accept `--set key=value` overrides; explicit flags win over both. The resolved
configuration is printed to stdout in the same format, under a `# sta-mdct <command>`
header, before anything runs; flag-only subcommands echo their resolved flags. Exit codes: 0 success, 1 usage
error, 2 runtime or invariant failure.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from sta_mdct.attacks.common import Surrogate, check_ball, quantize_within_ball
from sta_mdct.attacks.objectives import AttackObjective, Task, decide
from sta_mdct.attacks.registry import run_attack
from sta_mdct.audio.wav import read_wav, write_wav
from sta_mdct.cli.errors import EXIT_OK, EXIT_USAGE, report_failure
from sta_mdct.config import LOG_LEVEL
from sta_mdct.errors import ConfigError, StaMdctError
from sta_mdct.nets.models import build_model
from sta_mdct.nets.serialization import load_model, load_profiles, save_model, save_profiles
from sta_mdct.nets.speakers import SpeakerProfile, enroll, profile_matrix
from sta_mdct.saliency.layer_cam import LAST_CONV, layer_cam
from sta_mdct.saliency.render import render
from sta_mdct.schemas.attack import AttackConfig, AttackerKind
from sta_mdct.schemas.corpus import CorpusSpec, TrainConfig
from sta_mdct.schemas.model import ModelSpec, resolve_architecture
from sta_mdct.scoring.detection import eer, min_dcf
from sta_mdct.scoring.quality import snr
from sta_mdct.scoring.rates import rates
from sta_mdct.scoring.trials import ACCEPT, ScoreSet, read_trials_csv
from sta_mdct.services.calibration import threshold_at_eer
from sta_mdct.services.experiment import run
from sta_mdct.services.manifest import load_plan, plan_values
from sta_mdct.services.tables import write_table
from sta_mdct.training.corpus import load_corpus, synth_corpus, write_corpus
from sta_mdct.training.trainer import train
from sta_mdct.utils.config_file import dump_kv, format_value, load_config
from sta_mdct.utils.logging import setup_logging, teardown_logging

logger = logging.getLogger(__name__)

DEFAULT_KEYS = ["epsilon", "iterations", "alpha", "momentum", "n_transforms", "sigma", "rho", "window_length"]
# Namespace entries that are plumbing, not settings
INTERNAL_ARGS = {"handler", "command", "set", "config", "spec", "plan"}
EVALUATE_HEADER = ["index", "enroll_id", "speaker_id", "expected", "attack_target", "input", "score", "decision"]


class UsageError(Exception):
    """Bad flag combination found after argparse accepted the command line."""


def parse_overrides(items: Sequence[str] | None) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def split_csv(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def find_profile(profiles: Sequence[SpeakerProfile], speaker_id: str, source: str) -> int:
    for i, p in enumerate(profiles):
        if p.speaker_id == speaker_id:
            return i
    raise ConfigError(f"--target/--profile {speaker_id!r} is not enrolled in {source}")


def resolved_flags(args: argparse.Namespace) -> dict[str, Any]:
    """Flag values after argparse defaults, keyed by destination; unset flags are left out."""
    return {k: v for k, v in vars(args).items() if k not in INTERNAL_ARGS and v is not None}


def echo_config(command: str, values: dict[str, Any], descriptions: dict[str, str] | None = None) -> None:
    """Print the resolved settings of one run as a `key = value` block."""
    print(f"# sta-mdct {command}")
    for key, value in values.items():
        if descriptions and descriptions.get(key):
            print(f"# {descriptions[key]}")
        print(dump_kv({key: value}), end="")


# --- Subcommands ---


def cmd_synth(args: argparse.Namespace) -> None:
    spec = load_config(CorpusSpec, args.spec, {**parse_overrides(args.set), "seed": args.seed})
    echo_config(args.command, spec.model_dump())
    write_corpus(synth_corpus(spec), args.out)


def cmd_train(args: argparse.Namespace) -> None:
    cfg = load_config(TrainConfig, args.config, {**parse_overrides(args.set), "seed": args.seed})
    spec = ModelSpec(architecture=resolve_architecture(args.model))
    echo_config(args.command, {"architecture": spec.architecture, **cfg.model_dump()})
    corpus = load_corpus(args.corpus)
    model, log = train(build_model(spec, seed=cfg.seed), corpus, cfg)
    save_model(model, args.out)
    print(f"final_accuracy = {format_value(log.final_accuracy)}")


def cmd_enroll(args: argparse.Namespace) -> None:
    echo_config(args.command, resolved_flags(args))
    model = load_model(args.model)
    corpus = load_corpus(args.corpus)
    profiles = []
    for speaker, utterances in corpus.by_speaker().items():
        chosen = utterances[args.skip : args.skip + args.utterances]
        if not chosen:
            raise ConfigError(f"--skip {args.skip} leaves no enrollment utterances for speaker {speaker}")
        profiles.append(enroll(model, [u.samples for u in chosen], speaker))
    save_profiles(profiles, args.out)
    print(dump_kv({"speakers": len(profiles)}), end="")


def build_objective(
    task: Task, profiles: list[SpeakerProfile], target: str, threshold: float | None, source: str
) -> AttackObjective:
    index = find_profile(profiles, target, source)
    if task.is_verification:
        objective = AttackObjective(task, (profiles[index],), 0, threshold)
    else:
        objective = AttackObjective(task, tuple(profiles), index, threshold)
    objective.validate()
    return objective


def cmd_attack(args: argparse.Namespace) -> None:
    model_paths, profile_paths = split_csv(args.surrogate), split_csv(args.profiles)
    if len(model_paths) != len(profile_paths):
        raise UsageError(f"--surrogate names {len(model_paths)} models but --profiles {len(profile_paths)} files")
    overrides = {**parse_overrides(args.set), "attacker": args.attacker, "seed": args.seed}
    cfg = load_config(AttackConfig, args.config, overrides)
    echo_config(args.command, {**resolved_flags(args), **cfg.model_dump()})

    task = Task(args.objective)
    surrogates = [
        Surrogate(
            load_model(m),
            build_objective(task, load_profiles(p), args.target, args.threshold, p),
            Path(m).stem,
        )
        for m, p in zip(model_paths, profile_paths, strict=True)
    ]
    x = read_wav(args.in_path).samples
    result = run_attack(x, surrogates, cfg)
    x_out = quantize_within_ball(result.adversarial, x, cfg.epsilon)
    linf = check_ball(x_out, x, cfg.epsilon, context="attack output")
    write_wav(args.out, x_out)
    print(dump_kv({"linf": float(linf), "snr_db": snr(x, x_out)}), end="")


def _evaluate_input(args: argparse.Namespace, trial) -> tuple[str, Path]:
    if trial.adversarial_ref and args.adversarial_dir:
        return "adversarial", Path(args.adversarial_dir) / trial.adversarial_ref
    if not args.corpus:
        raise ConfigError(f"trial {trial.index} has no adversarial example and --corpus is not set")
    return "clean", Path(args.corpus) / trial.test_ref


def cmd_evaluate(args: argparse.Namespace) -> None:
    echo_config(args.command, resolved_flags(args))
    model = load_model(args.victim)
    profiles = load_profiles(args.profiles)
    trials = read_trials_csv(args.trials)
    by_id = {p.speaker_id: p for p in profiles}
    matrix = profile_matrix(profiles)

    inputs, scores = [], []
    for trial in trials:
        kind, path = _evaluate_input(args, trial)
        embedding = model.forward(read_wav(path).samples)[0]
        if args.task == "asv":
            if trial.enroll_id not in by_id:
                raise ConfigError(f"trial {trial.index}: enrollment {trial.enroll_id!r} not in {args.profiles}")
            scores.append(np.array([float(np.dot(by_id[trial.enroll_id].embedding, embedding))]))
        else:
            scores.append(matrix @ embedding)
        inputs.append(kind)

    threshold = args.threshold
    if args.task == "asv" and threshold is None:
        threshold = threshold_at_eer([float(s[0]) for s in scores], [t.expected == ACCEPT for t in trials])
    task = Task.ASV_IMPERSONATION if args.task == "asv" else Task(args.task)
    decisions: list[Any] = []
    for s in scores:
        decision = decide(task, s, threshold)
        decisions.append(decision if args.task == "asv" or decision is None else profiles[int(decision)].speaker_id)

    rows = [
        (t.index, t.enroll_id, t.speaker_id, t.expected, t.attack_target, kind, float(np.max(s)), d)
        for t, kind, s, d in zip(trials, inputs, scores, decisions, strict=True)
    ]
    write_table(Path(args.out), EVALUATE_HEADER, rows)

    report = rates(trials, decisions)
    summary: dict[str, Any] = {"threshold": threshold, "far": report.far, "tasr": report.tasr, "ier": report.ier}
    if args.task == "asv":
        scored = ScoreSet(np.array([float(s[0]) for s in scores]), np.array([t.expected == ACCEPT for t in trials]))
        summary.update(eer=eer(scored)[0], min_dcf=min_dcf(scored))
    print(dump_kv(summary), end="")


def cmd_saliency(args: argparse.Namespace) -> None:
    echo_config(args.command, resolved_flags(args))
    model = load_model(args.model)
    profiles = load_profiles(args.profiles)
    profile = profiles[find_profile(profiles, args.profile, args.profiles)]
    saliency = layer_cam(model, read_wav(args.in_path), profile, args.layer)
    render(saliency, args.out)
    print(dump_kv({"layer": saliency.layer, "speaker_id": saliency.speaker_id, "score": saliency.score}), end="")


def cmd_experiment(args: argparse.Namespace) -> None:
    plan = load_plan(args.plan, parse_overrides(args.set))
    echo_config(args.command, plan_values(plan))
    report = run(plan)
    passed = sum(1 for row in report.acceptance if row[-1])
    print(dump_kv({"output_dir": report.out_dir, "acceptance_passed": f"{passed}/{len(report.acceptance)}"}), end="")


def cmd_defaults(args: argparse.Namespace) -> None:
    """Attack defaults, each preceded by its description; the output is itself a valid config file."""
    cfg = AttackConfig()
    values = {key: cfg.step if key == "alpha" else getattr(cfg, key) for key in DEFAULT_KEYS}
    descriptions = {key: AttackConfig.model_fields[key].description or "" for key in DEFAULT_KEYS}
    echo_config(args.command, values, descriptions)


# --- Parser ---


def add_config_flags(parser: argparse.ArgumentParser, flag: str = "--config") -> None:
    parser.add_argument(flag, dest="config" if flag == "--config" else flag.lstrip("-"), help="key = value file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override one config value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sta-mdct", description="Transferable adversarial audio attacks")
    parser.add_argument("--log-level", default=LOG_LEVEL, type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate a synthetic multi-speaker WAV corpus")
    add_config_flags(p, "--spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train", help="Train a toy embedding model")
    p.add_argument("--model", required=True, help="A (convnet-a) or B (framenet-b)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("enroll", help="Enroll every corpus speaker into a profile file")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--skip", type=int, default=20, help="Leading utterances per speaker to skip (training split)")
    p.add_argument("--utterances", type=int, default=3, help="Enrollment utterances per speaker")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_enroll)

    p = sub.add_parser("attack", help="Craft one adversarial example on one or more surrogates")
    p.add_argument("--attacker", choices=[k.value for k in AttackerKind])
    p.add_argument("--surrogate", required=True, help="Model file(s), comma-separated for an ensemble")
    p.add_argument("--profiles", required=True, help="One profile file per surrogate, comma-separated")
    p.add_argument("--objective", required=True, choices=[t.value for t in Task])
    p.add_argument("--target", required=True, help="Enrolled speaker id the objective refers to")
    p.add_argument("--threshold", type=float, help="Decision threshold (required for osi)")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(handler=cmd_attack)

    p = sub.add_parser("evaluate", help="Score a trial list on a victim model")
    p.add_argument("--victim", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--trials", required=True)
    p.add_argument("--task", choices=["asv", "csi", "osi"], default="asv")
    p.add_argument("--corpus", help="Root that clean test_ref paths resolve against")
    p.add_argument("--adversarial-dir", help="Root that adversarial_ref paths resolve against")
    p.add_argument("--threshold", type=float, help="Defaults to the EER threshold of the scores (asv)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("saliency", help="Render a Layer-CAM map of one utterance")
    p.add_argument("--model", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--profile", required=True, help="Speaker id whose score is explained")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--layer", default=LAST_CONV)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_saliency)

    p = sub.add_parser("experiment", help="Run a full experiment plan")
    add_config_flags(p, "--plan")
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("defaults", help="Print the attack defaults")
    p.set_defaults(handler=cmd_defaults)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        setup_logging(args.log_level, args.command)
        args.handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"sta-mdct {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StaMdctError as e:
        return report_failure(e, args.command)
    finally:
        teardown_logging()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
