"""Prometheus metrics instrumentation.

This module defines all Prometheus metrics for monitoring attack campaigns.
Metrics are organized by category: attacks, models, experiments, and errors.
"""

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Gauge, Histogram, Info, write_to_textfile

# Application info
app_info = Info("sta_mdct_app", "Application information")
app_info.info({"version": "0.1.0", "service": "sta-mdct"})

# Attack metrics
attacks_total = Counter("attacks_total", "Total adversarial examples generated", ["attacker"])

attack_duration_seconds = Histogram(
    "attack_duration_seconds", "Wall time spent generating one adversarial example", ["attacker"]
)

gradient_evaluations_total = Counter(
    "gradient_evaluations_total", "Total model input-gradient evaluations", ["architecture"]
)

invariant_violations_total = Counter("invariant_violations_total", "Total epsilon-ball or range violations")

# Evaluation metrics
trials_evaluated_total = Counter("trials_evaluated_total", "Total trials scored by a victim model", ["victim"])

# Training metrics
training_epochs_total = Counter("training_epochs_total", "Total training epochs completed", ["architecture"])

# Experiment metrics
experiments_active = Gauge("experiments_active", "Number of experiments currently running")

experiment_duration_seconds = Histogram("experiment_duration_seconds", "Experiment wall time in seconds")

# Error metrics
errors_total = Counter(
    "errors_total",
    "Total errors encountered",
    ["error_type", "component"],  # component: audio, attack, train, experiment, cli
)


def dump_registry(path: Path) -> None:
    """Write the current registry in Prometheus textfile-collector format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
