"""Face-flip Metropolis sampler for the loop O(n) measure.

A proposal picks a uniform domain face and flips its hexagon.  The weight
ratio needs the change in edge count (local) and the change in the number
of loops, found by tracing only the components through the six corners of
the face before and after the flip.  Random numbers are drawn in blocks by
numpy and consumed by the compiled kernel, so a chain is a pure function of
its seed.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..rng import make_rng
from ..planar.lattice import face_corners
from .config import GibbsSpec, LoopConfig, validate
from .exact import face_set_code


class FlipTables:
    """Integer arrays describing the host patch and the flippable faces."""

    def __init__(self, spec: GibbsSpec):
        host = spec.host
        self.spec = spec
        V, E = len(host.vertex_list), host.n_edges
        self.vedges = -np.ones((V, 3), dtype=np.int64)
        for v, es in enumerate(host.vertex_edges):
            self.vedges[v, :len(es)] = es
        self.ends = np.array([[host.vertex_index[a], host.vertex_index[b]]
                              for a, b in host.endpoints], dtype=np.int64).reshape(E, 2)
        faces = spec.faces
        self.faces = faces
        self.face_edges = np.array([host.face_edge_ids(f) for f in faces], dtype=np.int64)
        self.face_verts = np.array([[host.vertex_index[c] for c in face_corners(f)] for f in faces],
                                   dtype=np.int64)
        self.log_n = math.log(spec.n)
        self.log_x = math.log(spec.x)
        self.stamp = np.zeros(V, dtype=np.int64)
        self.tag = np.zeros(1, dtype=np.int64)

    def state_array(self, edges) -> np.ndarray:
        s = np.zeros(self.spec.host.n_edges, dtype=np.uint8)
        s[list(edges)] = 1
        return s

    def deltas(self, edges, face_index: int) -> tuple[int, int]:
        """(change in loop count, change in edge count) of flipping a face."""
        state = self.state_array(edges)
        dl, de = _flip_deltas(state, self.face_edges[face_index], self.face_verts[face_index],
                              self.vedges, self.ends, self.stamp, self.tag)
        return int(dl), int(de)

    def log_ratio(self, edges, face_index: int) -> float:
        dl, de = self.deltas(edges, face_index)
        return dl * self.log_n + de * self.log_x


@njit(cache=True)
def _other_edge(state, vedges, u, e):
    for j in range(3):
        f = vedges[u, j]
        if f >= 0 and f != e and state[f]:
            return f
    return -1


@njit(cache=True)
def _cycles_through(state, verts, vedges, ends, stamp, tag):
    """Number of distinct cycles of ``state`` passing through ``verts``."""
    tag[0] += 1
    t = tag[0]
    count = 0
    for i in range(verts.shape[0]):
        v = verts[i]
        if stamp[v] == t:
            continue
        stamp[v] = t
        e0 = _other_edge(state, vedges, v, -1)
        if e0 < 0 or _other_edge(state, vedges, v, e0) < 0:
            continue
        u, e = v, e0
        while True:
            w = ends[e, 0] if ends[e, 1] == u else ends[e, 1]
            if w == v:
                count += 1
                break
            stamp[w] = t
            e = _other_edge(state, vedges, w, e)
            if e < 0:
                break
            u = w
    return count


@njit(cache=True)
def _flip_deltas(state, fedges, fverts, vedges, ends, stamp, tag):
    before = _cycles_through(state, fverts, vedges, ends, stamp, tag)
    present = 0
    for j in range(6):
        present += state[fedges[j]]
        state[fedges[j]] ^= 1
    after = _cycles_through(state, fverts, vedges, ends, stamp, tag)
    for j in range(6):
        state[fedges[j]] ^= 1
    return after - before, 6 - 2 * present


@njit(cache=True)
def _run(state, parity, face_edges, face_verts, vedges, ends, log_n, log_x,
         props, us, stamp, tag, per_record, codes, edge_rec, record_edges):
    """Apply ``props`` proposals; after every ``per_record`` of them store a sample."""
    accepted = 0
    k = 0
    for t in range(props.shape[0]):
        f = props[t]
        if f >= 0:      # negative entries are held slots
            accepted += _step(state, parity, face_edges, face_verts, vedges, ends,
                              log_n, log_x, f, us[t], stamp, tag)
        if per_record > 0 and (t + 1) % per_record == 0:
            c = 0
            for i in range(min(parity.shape[0], 62)):
                if parity[i]:
                    c |= 1 << i
            codes[k] = c
            if record_edges:
                edge_rec[k, :] = state
            k += 1
    return accepted


@njit(cache=True)
def _step(state, parity, face_edges, face_verts, vedges, ends, log_n, log_x, f, u, stamp, tag):
    dl, de = _flip_deltas(state, face_edges[f], face_verts[f], vedges, ends, stamp, tag)
    lr = dl * log_n + de * log_x
    if lr >= 0.0 or u < math.exp(lr):
        for j in range(6):
            state[face_edges[f, j]] ^= 1
        parity[f] ^= 1
        return 1
    return 0


class MetropolisChain:
    """One reproducible chain; ``seed`` and ``stream`` fix every random draw."""

    block = 1 << 18

    def __init__(self, spec: GibbsSpec, omega0=None, seed=0, stream: int = 0):
        self.spec = spec
        self.tables = FlipTables(spec)
        edges = spec.boundary if omega0 is None else validate(omega0, spec.host, True).edges
        if not (edges ^ spec.boundary) <= spec.domain.edges:
            raise ValueError("initial configuration does not match the boundary condition")
        self.state = self.tables.state_array(edges)
        F = len(spec.faces)
        self.parity = np.zeros(F, dtype=np.uint8)
        if F <= 62:
            code = face_set_code(spec, edges)
            self.parity[:] = [(code >> i) & 1 for i in range(F)]
        self.rng = make_rng(seed, stream)
        self.proposals = 0
        self.accepted = 0

    @property
    def n_faces(self):
        return len(self.tables.faces)

    def _go(self, n_props, per_record=0, n_records=0, record_edges=False):
        T = self.tables
        props = self.rng.integers(0, self.n_faces, size=n_props)
        us = self.rng.random(n_props)
        if per_record > 1:
            # The last slot before each record is held with probability 1/2.
            # At n = x = 1 every flip is accepted and the parity of the
            # flipped-face set alternates, so a fixed spacing would only see
            # half of the states; a random observation time removes that.
            last = np.arange(per_record - 1, n_props, per_record)
            hold = self.rng.random(last.size) < 0.5
            props[last[hold]] = -1
        codes = np.zeros(n_records, dtype=np.int64)
        rec = np.zeros((n_records if record_edges else 0, self.state.size), dtype=np.uint8)
        acc = _run(self.state, self.parity, T.face_edges, T.face_verts, T.vedges, T.ends,
                   T.log_n, T.log_x, props, us, T.stamp, T.tag, per_record, codes, rec,
                   record_edges)
        self.proposals += int((props >= 0).sum())
        self.accepted += int(acc)
        return codes, rec

    def run(self, sweeps: int):
        total = sweeps * self.n_faces
        while total > 0:
            m = min(total, self.block)
            self._go(m)
            total -= m

    def sample(self, n_samples: int, gap: int = 10, record_edges: bool = False):
        """Record ``n_samples`` states spaced ``gap`` sweeps apart.

        Returns face-set codes and, if asked, the full edge-state rows.
        """
        per = max(1, gap * self.n_faces) + 1
        per_block = max(1, self.block // per)
        codes, rows = [], []
        left = n_samples
        while left > 0:
            m = min(left, per_block)
            c, r = self._go(m * per, per, m, record_edges)
            codes.append(c)
            if record_edges:
                rows.append(r)
            left -= m
        codes = np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)
        rows = np.concatenate(rows) if rows else None
        return codes, rows

    def config(self) -> LoopConfig:
        return LoopConfig(self.spec.host, frozenset(np.flatnonzero(self.state).tolist()), True)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else float("nan")


def metropolis_chain(spec: GibbsSpec, omega0=None, sweeps: int = 1000, seed=0,
                     stream: int = 0) -> tuple[LoopConfig, dict]:
    """Run ``sweeps`` sweeps and return the final state with diagnostics."""
    chain = MetropolisChain(spec, omega0, seed, stream)
    chain.run(sweeps)
    return chain.config(), {"proposals": chain.proposals, "accepted": chain.accepted,
                            "acceptance_rate": chain.acceptance_rate}


def sample_codes(spec: GibbsSpec, n_samples: int, seed, burnin: int = 1000, gap: int = 10,
                 omega0=None, stream: int = 0) -> np.ndarray:
    """Face-set codes of decorrelated samples (for comparison with enumeration)."""
    chain = MetropolisChain(spec, omega0, seed, stream)
    chain.run(burnin)
    codes, _ = chain.sample(n_samples, gap)
    return codes
