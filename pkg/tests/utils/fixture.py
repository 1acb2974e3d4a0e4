"""Numerical helpers shared by the test modules."""

from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np


def write_text(path: Path, text: str) -> Path:
    """
    Write a config or fixture file and return its path.

    Args:
        path (Path): Destination.
        text (str): File contents.

    Returns:
        Path: The written path.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def central_differences(f: Callable[[np.ndarray], float], x: np.ndarray, coords: Sequence[int], h: float) -> np.ndarray:
    """(f(x + h e_i) - f(x - h e_i)) / 2h at the given coordinates."""
    out = []
    for i in coords:
        plus, minus = x.copy(), x.copy()
        plus[i] += h
        minus[i] -= h
        out.append((f(plus) - f(minus)) / (2 * h))
    return np.array(out)


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """||estimate - reference|| / ||reference||, aggregated over all coordinates."""
    return float(np.linalg.norm(estimate - reference) / max(np.linalg.norm(reference), 1e-300))


def gradient_error(
    f: Callable[[np.ndarray], float], gradient: np.ndarray, x: np.ndarray, n_coords: int = 25, h: float = 1e-2
) -> float:
    """Aggregate relative error of an analytic gradient against central differences."""
    coords = np.random.default_rng(7).choice(x.shape[0], size=min(n_coords, x.shape[0]), replace=False)
    return relative_error(gradient[coords], central_differences(f, x, coords, h))


def naive_rates(targets: np.ndarray, nontargets: np.ndarray, theta: float) -> tuple[float, float]:
    """(FAR, FRR) at theta with accept meaning score >= theta, counted one trial at a time."""
    false_accepts = sum(1 for s in nontargets if s >= theta)
    false_rejects = sum(1 for s in targets if s < theta)
    return false_accepts / len(nontargets), false_rejects / len(targets)


def oracle_operating_points(targets: np.ndarray, nontargets: np.ndarray) -> list[tuple[float, float]]:
    """Every achievable (FAR, FRR) pair, thresholds at each distinct score then +inf."""
    thresholds = sorted(set(np.concatenate([targets, nontargets]).tolist())) + [np.inf]
    return [naive_rates(targets, nontargets, theta) for theta in thresholds]


def oracle_eer(targets: np.ndarray, nontargets: np.ndarray) -> float:
    """First FRR >= FAR crossing, linearly interpolated between the bracketing points."""
    points = oracle_operating_points(targets, nontargets)
    for k, (far, frr) in enumerate(points):
        if frr >= far:
            if k == 0 or far == frr:
                return far
            prev_far, prev_frr = points[k - 1]
            lam = (prev_far - prev_frr) / ((prev_far - prev_frr) - (far - frr))
            return prev_far + lam * (far - prev_far)
    raise AssertionError("the sweep always ends at FAR = 0, FRR = 1")


def oracle_min_dcf(targets: np.ndarray, nontargets: np.ndarray, p_target: float = 0.05) -> float:
    costs = [frr * p_target + far * (1 - p_target) for far, frr in oracle_operating_points(targets, nontargets)]
    return min(costs) / min(p_target, 1 - p_target)
