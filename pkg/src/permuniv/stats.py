"""Small statistics helpers used by the Monte Carlo runners."""

from __future__ import annotations

import math
from statistics import NormalDist

DEFAULT_CONFIDENCE = 0.99


def z_value(confidence: float = DEFAULT_CONFIDENCE) -> float:
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(
    successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = z_value(confidence)
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def quantiles(values, probs=(0.0, 0.25, 0.5, 0.75, 1.0)) -> dict[str, float]:
    """Nearest-rank quantiles; deterministic and dependency-free."""
    if not values:
        return {}
    s = sorted(values)
    out = {}
    for p in probs:
        idx = min(len(s) - 1, max(0, math.ceil(p * len(s)) - 1))
        out[f"q{int(round(p * 100)):02d}"] = s[idx]
    return out
