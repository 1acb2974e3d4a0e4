"""CSV result tables. Cells are rendered deterministically so reruns are byte-identical."""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from sta_mdct.errors import ExperimentError

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    Write a header plus rows; None becomes an empty cell, floats use repr.

    Raises:
        ExperimentError: Path is not writable.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            count = 0
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
                count += 1
    except OSError as e:
        raise ExperimentError(f"cannot write {path}: {e}") from e
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def read_table(path: Path) -> list[dict[str, str]]:
    try:
        with path.open(newline="") as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise ExperimentError(f"cannot read {path}: {e}") from e


def finite_mean(values: Sequence[float]) -> float | None:
    """Mean of the finite values; None when there are none."""
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if finite else None
