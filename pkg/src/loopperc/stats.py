"""Small estimators shared by the samplers."""
from __future__ import annotations

import math

import numpy as np


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if n <= 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def standard_error(phat: float, n: int) -> float:
    if n <= 0:
        return math.inf
    return math.sqrt(max(phat * (1 - phat), 0.0) / n)


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def empirical_tv(counts, probs) -> float:
    counts = np.asarray(counts, dtype=float)
    return total_variation(counts / counts.sum(), probs)
