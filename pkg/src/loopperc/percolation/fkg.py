"""Exact positive-association and domination certificates on a few sites.

A configuration of ``m`` sites is coded as the integer ``sum(bit_i << i)``;
an event is a 0/1 vector of length ``2**m`` indexed by that code.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .configs import ExactMeasure

MAX_SITES = 4


def _check_m(m: int):
    if m < 0 or m > MAX_SITES:
        raise ValueError(f"increasing events are enumerated only for m <= {MAX_SITES}")


def is_increasing(event, m: int) -> bool:
    event = np.asarray(event)
    for c in range(1 << m):
        for i in range(m):
            if not c >> i & 1 and event[c] > event[c | 1 << i]:
                return False
    return True


@lru_cache(maxsize=None)
def _monotone(m: int) -> tuple:
    # A monotone f on m sites splits by the last coordinate into f0 <= f1,
    # both monotone on m-1 sites.
    if m == 0:
        return ((0,), (1,))
    lower = _monotone(m - 1)
    out = []
    for f0 in lower:
        for f1 in lower:
            if all(a <= b for a, b in zip(f0, f1)):
                out.append(f0 + f1)
    return tuple(out)


def increasing_events(m: int) -> np.ndarray:
    """All increasing events on {0,1}^m, one row each (constants included)."""
    _check_m(m)
    events = np.array(_monotone(m), dtype=np.int8).reshape(-1, 1 << m)
    for ev in events:
        assert is_increasing(ev, m)
    return events


def _nonconstant(m: int) -> np.ndarray:
    ev = increasing_events(m)
    s = ev.sum(axis=1)
    return ev[(s > 0) & (s < 1 << m)]


def prob_vector(mu: ExactMeasure) -> tuple[np.ndarray, int]:
    """Probabilities indexed by configuration code."""
    m = len(mu.configs[0])
    _check_m(m)
    p = np.zeros(1 << m)
    for c, q in zip(mu.configs, mu.probs):
        if len(c) != m:
            raise ValueError("configurations of different lengths")
        p[sum(int(b) << i for i, b in enumerate(c))] += q
    return p, m


def check_positive_association(mu: ExactMeasure) -> float:
    """min over non-constant increasing A, B of P(A and B) - P(A) P(B)."""
    p, m = prob_vector(mu)
    ev = _nonconstant(m).astype(float)
    if not len(ev):
        return 0.0
    pa = ev @ p
    pab = (ev * p) @ ev.T
    return float((pab - np.outer(pa, pa)).min())


def check_dominated_by_complement(mu: ExactMeasure) -> float:
    """min over non-constant increasing A of P(1 - sigma in A) - P(sigma in A)."""
    p, m = prob_vector(mu)
    ev = _nonconstant(m).astype(float)
    if not len(ev):
        return 0.0
    flip = (1 << m) - 1 - np.arange(1 << m)
    return float((ev @ p[flip] - ev @ p).min())
