"""Standardized error reporting for the command line."""

import logging
import re
import sys
from typing import Any

from sta_mdct.errors import (
    AudioFormatError,
    GradientDivergenceError,
    StaMdctError,
    TrainingDivergenceError,
)
from sta_mdct.telemetry import errors_total

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class ErrorReport:
    """Standard error record printed to stderr."""

    @staticmethod
    def format(error_code: str, message: str, details: dict[str, Any] | None = None) -> dict[str, Any]:
        """
        Format an error with a consistent structure.

        Args:
            error_code: Error code (e.g., "GRADIENT_DIVERGENCE", "CONFIG")
            message: Human-readable error message
            details: Additional error details (optional)

        Returns:
            Standardized error dictionary
        """
        return {"error": {"code": error_code, "message": message, "details": details or {}}}


def error_code(exc: BaseException) -> str:
    """`GradientDivergenceError` -> `GRADIENT_DIVERGENCE`."""
    name = re.sub(r"(Error|Violation)$", "", type(exc).__name__) or type(exc).__name__
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).upper()


def error_details(exc: BaseException) -> dict[str, Any]:
    if isinstance(exc, GradientDivergenceError):
        return {"attacker": exc.attacker, "iteration": exc.iteration}
    if isinstance(exc, TrainingDivergenceError):
        return {"epoch": exc.epoch, "loss": exc.loss}
    if isinstance(exc, AudioFormatError):
        return {"field": exc.field}
    return {}


def render_error(report: dict[str, Any]) -> str:
    error = report["error"]
    lines = [f"error: {error['code']}: {error['message']}"]
    lines.extend(f"  {key} = {value}" for key, value in error["details"].items())
    return "\n".join(lines)


def report_failure(exc: StaMdctError, command: str) -> int:
    """Log and print a library failure; returns the runtime exit code."""
    errors_total.labels(error_type=type(exc).__name__, component="cli").inc()
    report = ErrorReport.format(error_code(exc), str(exc), error_details(exc))
    logger.error(f"{command} failed: {type(exc).__name__}: {exc}")
    print(render_error(report), file=sys.stderr)
    return EXIT_RUNTIME
