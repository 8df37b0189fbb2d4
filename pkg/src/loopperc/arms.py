"""Arm events, arc splitting of a cut-set and crossing-component counts.

Arms start at a cut-set vertex and run to the outer boundary of the patch
through the exterior region of the cut-set.  Arc indices are 1-based as in
the usual statement: ``Arc_j = {v_(i_{j-1}+1), ..., v_(i_j)}`` with
``i_0 = i_{2k}``, so the first arc wraps around the end of ``S``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .percolation.configs import SiteConfig
from .percolation.kernels import batch_arm_reach, crossing_count
from .planar.graph import CutSet, Graph
from .rng import make_rng


class ArmError(ValueError):
    pass


@dataclass
class ArmGeometry:
    """Index arrays for arm computations on a host graph and a cut-set."""

    graph: Graph
    cut: CutSet
    outer: frozenset

    def __post_init__(self):
        g = self.graph
        self.indptr, self.indices = g.csr()
        V = len(g.vertices)
        self.allowed = np.zeros(V, dtype=np.bool_)
        for v in self.cut.exterior:
            self.allowed[g.index[v]] = True
        self.outer_mask = np.zeros(V, dtype=np.bool_)
        for v in self.outer:
            self.outer_mask[g.index[v]] = True
        self.S = np.array([g.index[v] for v in self.cut.S], dtype=np.int64)
        self.inner_mask = np.zeros(V, dtype=np.bool_)
        self.inner_mask[self.S] = True

    def reach(self, bits: np.ndarray, state: int) -> np.ndarray:
        """(N, L) matrix: does S[i] have an arm of the given state?"""
        bits = np.ascontiguousarray(np.atleast_2d(bits), dtype=np.uint8)
        return batch_arm_reach(self.indptr, self.indices, bits, np.uint8(state), self.allowed,
                               self.outer_mask, self.S)


# ---------------------------------------------------------------- tables

def _range_cols(i: int, j: int, L: int) -> list[int]:
    """0-based columns of the 1-based cyclic index range i..j."""
    if not (1 <= i <= L and 1 <= j <= L):
        raise IndexError("arc index out of range")
    if i <= j:
        return list(range(i - 1, j))
    return list(range(i - 1, L)) + list(range(0, j))


class PijTable:
    """Estimated probabilities that an index range of S has no open arm.

    Stores one row per sample with the per-vertex arm indicator; any
    ``p(i, j)`` is then a column-range reduction.  Tables can also be given
    explicitly through ``values`` (a function of 1-based ``(i, j)``).
    """

    def __init__(self, hits: np.ndarray | None = None, L: int | None = None,
                 values: Callable | None = None, description: str = ""):
        if hits is None and values is None:
            raise ValueError("need sample hits or explicit values")
        self.hits = None if hits is None else np.asarray(hits, dtype=bool)
        self.L = self.hits.shape[1] if self.hits is not None else int(L)
        self.N = self.hits.shape[0] if self.hits is not None else 0
        self._values = values
        self.description = description
        self._cache: dict = {}

    @classmethod
    def explicit(cls, L: int, values: dict | Callable) -> "PijTable":
        fn = values if callable(values) else (lambda i, j: values[(i, j)])
        return cls(L=L, values=fn, description="explicit")

    def p(self, i: int, j: int) -> float:
        key = (i, j)
        if key not in self._cache:
            if self._values is not None:
                v = float(self._values(i, j))
            else:
                cols = _range_cols(i, j, self.L)
                v = float(np.mean(~self.hits[:, cols].any(axis=1)))
            if not 0.0 <= v <= 1.0:
                raise ValueError("probability outside [0, 1]")
            self._cache[key] = v
        return self._cache[key]

    def se(self, i: int, j: int) -> float:
        if self.N == 0:
            return 0.0
        v = self.p(i, j)
        return math.sqrt(v * (1 - v) / self.N)

    def row(self) -> np.ndarray:
        """p(1, i) for i = 1..L."""
        return np.array([self.p(1, i) for i in range(1, self.L + 1)])

    def to_json(self) -> str:
        return json.dumps({"L": self.L, "N": self.N, "description": self.description,
                           "row": [float(v) for v in self.row()],
                           "se": [self.se(1, i) for i in range(1, self.L + 1)],
                           "singletons": [self.p(i, i) for i in range(1, self.L + 1)]})


def bernoulli_sampler(p: float):
    def sample(n_vertices: int, N: int, rng) -> np.ndarray:
        return (rng.random((N, n_vertices)) < p).astype(np.uint8)
    return sample


def constant_sampler(bit: int):
    def sample(n_vertices: int, N: int, rng) -> np.ndarray:
        return np.full((N, n_vertices), bit, dtype=np.uint8)
    return sample


def estimate_pij(sampler, graph: Graph, cut: CutSet, outer, N: int, seed) -> PijTable:
    """Monte Carlo table of arc-to-outer non-connection probabilities (open arms)."""
    if N < 1:
        raise ValueError("need at least one sample")
    geo = ArmGeometry(graph, cut, frozenset(outer))
    rng = make_rng(seed)
    bits = sampler(len(graph.vertices), N, rng)
    hits = geo.reach(bits, 1)
    return PijTable(hits, description=f"radius {cut.radius}, |S| = {len(cut.S)}, N = {N}")


# ---------------------------------------------------------------- splitting

def arc_split(row: Sequence[float], eps: float) -> int:
    """Smallest 1-based i with row[i] < sqrt(2 eps)."""
    row = np.asarray(row, dtype=float)
    if np.any(np.diff(row) > 1e-15):
        raise ValueError("row must be non-increasing")
    thr = math.sqrt(2 * eps)
    # guard only what existence of i* needs
    if not row[-1] < thr:
        raise ArmError("one-arm estimate too weak")
    return int(np.argmax(row < thr)) + 1


@dataclass
class ArcDecomposition:
    S: tuple
    indices: tuple                  # 1-based i_1 < ... < i_2k
    flags: list = field(default_factory=list)

    def __post_init__(self):
        L = len(self.S)
        idx = list(self.indices)
        if not idx or any(a >= b for a, b in zip(idx, idx[1:])) or idx[0] < 1 or idx[-1] > L:
            raise ValueError("split indices must satisfy 1 <= i_1 < ... < i_2k <= |S|")

    @property
    def k(self) -> int:
        return len(self.indices) // 2

    def arc_ranges(self) -> list[tuple[int, int]]:
        """1-based cyclic (start, end) of every arc; the first one wraps."""
        idx = list(self.indices)
        L = len(self.S)
        out = [((idx[-1] % L) + 1, idx[0])]
        for a, b in zip(idx, idx[1:]):
            out.append((a + 1, b))
        return out

    def arc_columns(self) -> list[list[int]]:
        return [_range_cols(i, j, len(self.S)) for i, j in self.arc_ranges()]

    def arcs(self) -> list[list]:
        return [[self.S[c] for c in cols] for cols in self.arc_columns()]

    def to_json(self) -> str:
        return json.dumps({"S": [list(v) if isinstance(v, tuple) else v for v in self.S],
                           "indices": list(self.indices), "flags": self.flags})


def iterated_split(table: PijTable, eps: float, k: int, S: Sequence | None = None,
                   margin: float = 2.0) -> ArcDecomposition:
    """Greedy choice of 2k split points with every arc's estimate <= eps / 4k.

    Estimates within ``margin`` standard errors of a threshold are recorded
    in ``flags`` rather than treated as failures.
    """
    L = table.L
    S = tuple(range(1, L + 1)) if S is None else tuple(S)
    flags = []
    pre = (eps / (8 * k)) ** (2 * k)
    p1L = table.p(1, L)
    if not p1L < pre:
        raise ArmError(f"one-arm estimate too weak: p(1, L) = {p1L} is not below {pre}")
    if abs(p1L - pre) < margin * table.se(1, L):
        flags.append({"check": "precondition", "estimate": p1L, "threshold": pre})
    thr = eps / (4 * k)
    idx = []
    prev = 0
    for _ in range(2 * k):
        nxt = None
        for i in range(prev + 1, L + 1):
            if table.p(prev + 1, i) <= thr:
                nxt = i
                break
        if nxt is None:
            raise ArmError("insufficient one-arm probability: S exhausted before 2k arcs")
        idx.append(nxt)
        prev = nxt
    dec = ArcDecomposition(S, tuple(idx), flags)
    for (i, j) in dec.arc_ranges():
        v = table.p(i, j)
        if v > thr:
            raise AssertionError(f"arc {i}..{j} violates the per-arc bound")
        if abs(v - thr) < margin * table.se(i, j):
            flags.append({"check": f"arc {i}..{j}", "estimate": v, "threshold": thr})
    return dec


def arcs_from_sizes(S: Sequence, sizes: Sequence[int], offset: int = 0) -> ArcDecomposition:
    """Arcs of the given consecutive sizes, the first one starting at ``offset``."""
    L = len(S)
    if sum(sizes) != L:
        raise ValueError("arc sizes must add up to |S|")
    ends = []
    pos = offset
    for s in sizes:
        pos += s
        ends.append(((pos - 1) % L) + 1)
    ends = sorted(ends)
    return ArcDecomposition(tuple(S), tuple(ends))


# ---------------------------------------------------------------- events


def arm_event_batch(geo: ArmGeometry, bits: np.ndarray, arcs: ArcDecomposition) -> np.ndarray:
    """Arm event for each row of ``bits``."""
    op = geo.reach(bits, 1)
    cl = geo.reach(bits, 0)
    ok = np.ones(op.shape[0], dtype=bool)
    for cols in arcs.arc_columns():
        ok &= op[:, cols].any(axis=1) & cl[:, cols].any(axis=1)
    return ok


def arm_event(sigma: SiteConfig, cut: CutSet, arcs: ArcDecomposition, outer) -> bool:
    """Every arc reaches ``outer`` by an open arm and by a closed arm."""
    geo = ArmGeometry(sigma.host, cut, frozenset(outer))
    return bool(arm_event_batch(geo, sigma.bits[None, :], arcs)[0])


def crossing_components(cfg: SiteConfig, inner, outer, state: int = 1) -> int:
    """Number of ``state`` clusters meeting both vertex sets."""
    g = cfg.host
    inner, outer = set(inner), set(outer)
    if inner & outer:
        raise ValueError("inner and outer sets must be disjoint")
    V = len(g.vertices)
    a = np.zeros(V, dtype=np.bool_)
    b = np.zeros(V, dtype=np.bool_)
    for v in inner:
        a[g.index[v]] = True
    for v in outer:
        b[g.index[v]] = True
    indptr, indices = g.csr()
    return int(crossing_count(indptr, indices, cfg.bits == state, a, b))


def catalan_check(sigma: SiteConfig, tau: SiteConfig, cut: CutSet, arcs: ArcDecomposition,
                  outer) -> bool:
    """Open crossings of sigma plus closed crossings of tau number at least k + 1.

    Raises ``ArmError`` when the hypotheses (sigma <= tau, both in the arm
    event) fail, so that a false return always means the conclusion failed.
    """
    if not sigma <= tau:
        raise ArmError("hypothesis fails: sigma is not below tau")
    geo = ArmGeometry(sigma.host, cut, frozenset(outer))
    both = arm_event_batch(geo, np.stack([sigma.bits, tau.bits]), arcs)
    if not both.all():
        raise ArmError("hypothesis fails: arm event does not hold for both configurations")
    c_open = crossing_components(sigma, cut.S, outer, 1)
    c_closed = crossing_components(tau, cut.S, outer, 0)
    return c_open + c_closed >= arcs.k + 1


def crossing_counts_batch(geo: ArmGeometry, bits: np.ndarray, state: int) -> np.ndarray:
    out = np.empty(bits.shape[0], dtype=np.int64)
    for s in range(bits.shape[0]):
        out[s] = crossing_count(geo.indptr, geo.indices, bits[s] == state, geo.inner_mask,
                                geo.outer_mask)
    return out


def random_arcs(S: Sequence, k: int, rng, min_size: int = 2) -> ArcDecomposition:
    """Uniformly random cyclic split of S into 2k arcs of at least ``min_size``."""
    L = len(S)
    if 2 * k * min_size > L:
        raise ValueError("S too short for 2k arcs of the requested size")
    spare = L - 2 * k * min_size
    cuts = np.sort(rng.integers(0, spare + 1, size=2 * k - 1))
    parts = np.diff(np.concatenate([[0], cuts, [spare]]))
    sizes = [int(min_size + p) for p in parts]
    return arcs_from_sizes(S, sizes, int(rng.integers(0, L)))


def catalan_sweep(graph: Graph, cut: CutSet, outer, k: int, p: float, accept: int, seed,
                  batch: int = 4096, cap: int = 10 ** 7, arcs: ArcDecomposition | None = None):
    """Rejection-sample monotone pairs in the arm event and check the inequality.

    Returns rows (k, premise_ok, conclusion_ok, c_open, c_closed) for the
    accepted pairs and the number of proposals used.
    """
    if p > 0.5:
        raise ValueError("monotone pairs need p <= 1/2")
    geo = ArmGeometry(graph, cut, frozenset(outer))
    rng = make_rng(seed)
    rows = []
    tried = 0
    V = len(graph.vertices)
    while len(rows) < accept and tried < cap:
        a = arcs if arcs is not None else random_arcs(cut.S, k, rng)
        u = rng.random((batch, V))
        sigma = (u < p).astype(np.uint8)
        tau = (u < 1 - p).astype(np.uint8)
        tried += batch
        ok = arm_event_batch(geo, sigma, a) & arm_event_batch(geo, tau, a)
        if not ok.any():
            continue
        s_ok, t_ok = sigma[ok], tau[ok]
        c_open = crossing_counts_batch(geo, s_ok, 1)
        c_closed = crossing_counts_batch(geo, t_ok, 0)
        for co, cc in zip(c_open, c_closed):
            if len(rows) >= accept:
                break
            rows.append((a.k, True, bool(co + cc >= a.k + 1), int(co), int(cc)))
    return rows, tried
