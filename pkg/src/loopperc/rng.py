"""Seeded, splittable random streams.

Every stochastic routine takes a 64-bit ``seed`` plus an optional stream
index.  Streams come from the counter-based Philox generator keyed by
``SeedSequence(seed, spawn_key=stream)``, so chain ``i`` of a run draws the
same numbers no matter how chains are scheduled across threads.
"""
from __future__ import annotations

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed, *stream: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed, *stream: int) -> int:
    """A derived 64-bit seed for the given stream path."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(s) for s in stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
