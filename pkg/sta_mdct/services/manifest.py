"""
Plan loading and the per-run manifest.

A manifest is itself a valid plan file: the resolved plan as `key = value` lines,
with the attack configuration flattened to `attack.<field>` keys. Fingerprints of the
configuration, model files and corpus are written as `#` comment lines, so
`experiment --plan <run>/manifest.txt` reproduces the run.
"""

import hashlib
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from sta_mdct.errors import ConfigError, ExperimentError
from sta_mdct.schemas.attack import AttackConfig
from sta_mdct.schemas.experiment import ExperimentPlan
from sta_mdct.training.corpus import Corpus
from sta_mdct.utils.config_file import dump_kv, load_config, load_kv_file, validate_config

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
ATTACK_PREFIX = "attack."
ATTACK_FILE_KEY = "attack_config"


def split_attack_keys(values: Mapping[str, Any]) -> tuple[dict[str, Any], dict[str, Any], str | None]:
    """Separate plan keys, `attack.*` keys and the optional attack config path."""
    plan_values: dict[str, Any] = {}
    attack_values: dict[str, Any] = {}
    attack_file = None
    for key, value in values.items():
        if key == ATTACK_FILE_KEY:
            attack_file = str(value) if value else None
        elif key.startswith(ATTACK_PREFIX):
            attack_values[key[len(ATTACK_PREFIX) :]] = value
        else:
            plan_values[key] = value
    return plan_values, attack_values, attack_file


def load_plan(path: Path | str | None, overrides: Mapping[str, Any] | None = None) -> ExperimentPlan:
    """
    Load an experiment plan file.

    `attack_config = <file>` pulls in an attack config file (relative paths resolve
    against the plan's directory); `attack.<field>` keys override it.

    Raises:
        ConfigError: Unreadable file, unknown keys or invalid values.
    """
    values: dict[str, Any] = dict(load_kv_file(path)) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    plan_values, attack_values, attack_file = split_attack_keys(values)
    if attack_file is not None and path is not None and not Path(attack_file).is_absolute():
        attack_file = str(Path(path).parent / attack_file)
    plan_values["attack"] = load_config(AttackConfig, attack_file, attack_values)
    return validate_config(ExperimentPlan, plan_values, source=str(path) if path else "<flags>")


def plan_values(plan: ExperimentPlan) -> dict[str, Any]:
    """Flat key/value view of a plan, attack fields prefixed."""
    values = {k: v for k, v in plan.model_dump().items() if k != "attack"}
    values.update({f"{ATTACK_PREFIX}{k}": v for k, v in plan.attack.model_dump().items()})
    return values


def config_hash(plan: ExperimentPlan) -> str:
    return hashlib.sha256(dump_kv(plan_values(plan)).encode("utf-8")).hexdigest()


def file_hash(path: Path | str) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise ExperimentError(f"cannot hash {path}: {e}") from e


def corpus_hash(corpus: Corpus) -> str:
    digest = hashlib.sha256()
    for u in corpus:
        digest.update(u.speaker_id.encode("utf-8"))
        digest.update(np.ascontiguousarray(u.samples, dtype="<f8").tobytes())
    return digest.hexdigest()


def write_manifest(
    plan: ExperimentPlan, out_dir: Path, corpus: Corpus, model_hashes: Mapping[str, str] | None = None
) -> Path:
    """Write `<out_dir>/manifest.txt`."""
    lines = [
        f"# config_hash = {config_hash(plan)}",
        f"# corpus_hash = {corpus_hash(corpus)}",
    ]
    lines.extend(f"# model_hash.{name} = {digest}" for name, digest in sorted((model_hashes or {}).items()))
    path = out_dir / MANIFEST_NAME
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n" + dump_kv(plan_values(plan)), encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot write manifest {path}: {e}") from e
    logger.info(f"[EXPERIMENT] Wrote manifest {path} (config hash {config_hash(plan)[:12]})")
    return path
