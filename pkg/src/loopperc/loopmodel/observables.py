"""Loop-geometry observables: surrounding loops and annulus-loop estimates."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..planar.lattice import DIRECTIONS, add, annulus, ball_faces, edge_key, surrounds
from ..stats import wilson_interval
from .config import GibbsSpec, LoopConfig, decompose
from .mcmc import FlipTables, MetropolisChain


def x_critical(n: float) -> float:
    """Conjectured critical edge weight 1/sqrt(2 + sqrt(2 - n)) for 0 <= n <= 2."""
    if not 0 <= n <= 2:
        raise ValueError("x_critical is defined for n in [0, 2]")
    return 1.0 / math.sqrt(2.0 + math.sqrt(2.0 - n))


def loops_around(omega: LoopConfig, f) -> int:
    """Number of loops of ``omega`` whose interior contains face ``f``."""
    dec, _ = decompose(omega)
    host = omega.host
    return sum(1 for es in dec.loop_edges
               if surrounds({host.edge_list[i] for i in es}, tuple(f)))


def annulus_edges(host, k: int) -> np.ndarray:
    """Mask of host edges lying in the closed annulus A_k (a side of some A_k face)."""
    faces = annulus(k)
    return np.array([a in faces or b in faces for a, b in host.edge_list], dtype=np.bool_)


def ray_edge_mask(host, f=(0, 0), direction: int = 0) -> np.ndarray:
    """Host edges crossed by the lattice ray from face ``f``."""
    mask = np.zeros(host.n_edges, dtype=np.bool_)
    cur = tuple(f)
    d = DIRECTIONS[direction]
    while True:
        nxt = add(cur, d)
        e = host.edge_index.get(edge_key(cur, nxt))
        if e is None:
            break
        mask[e] = True
        cur = nxt
    return mask


@njit(cache=True)
def _annulus_loop_rows(rows, ends, vedges, emask, ray):
    N, E = rows.shape
    out = np.zeros(N, dtype=np.bool_)
    seen = np.zeros(E, dtype=np.bool_)
    for s in range(N):
        state = rows[s]
        seen[:] = False
        for e0 in range(E):
            if not state[e0] or seen[e0]:
                continue
            # walk the component of e0 in both directions
            inside = True
            closed = False
            parity = 0
            seen[e0] = True
            if not emask[e0]:
                inside = False
            if ray[e0]:
                parity ^= 1
            for side in range(2):
                u = ends[e0, side]
                e = e0
                while True:
                    nxt = -1
                    for j in range(3):
                        f = vedges[u, j]
                        if f >= 0 and f != e and state[f]:
                            nxt = f
                    if nxt < 0:
                        break
                    if nxt == e0:
                        closed = True
                        break
                    seen[nxt] = True
                    if not emask[nxt]:
                        inside = False
                    if ray[nxt]:
                        parity ^= 1
                    e = nxt
                    u = ends[e, 0] if ends[e, 1] == u else ends[e, 1]
                if closed:
                    break
            if closed and inside and parity == 1:
                out[s] = True
                break
    return out


def annulus_loop_indicator(spec: GibbsSpec, rows: np.ndarray, k: int) -> np.ndarray:
    """Per sample row: is there a loop inside A_k surrounding the origin face?"""
    host = spec.host
    T = FlipTables(spec)
    return _annulus_loop_rows(rows, T.ends, T.vedges, annulus_edges(host, k),
                              ray_edge_mask(host))


def rsw_estimate(spec: GibbsSpec, k: int, samples: int, seed, burnin: int = 1000,
                 gap: int = 10, omega0=None, stream: int = 0) -> dict:
    """Monte Carlo probability of a loop in A_k around the origin, with a Wilson 95% CI."""
    if not ball_faces(2 * k) <= spec.domain.faces:
        raise ValueError("the domain must contain B_{2k}")
    chain = MetropolisChain(spec, omega0, seed, stream)
    chain.run(burnin)
    _, rows = chain.sample(samples, gap, record_edges=True)
    hits = int(annulus_loop_indicator(spec, rows, k).sum())
    lo, hi = wilson_interval(hits, samples)
    return {"n": spec.n, "x": spec.x, "k": k, "estimate": hits / samples, "ci_lo": lo,
            "ci_hi": hi, "samples": samples, "supported": spec.n * spec.x ** 2 <= 1 + 1e-12,
            "acceptance_rate": chain.acceptance_rate}
