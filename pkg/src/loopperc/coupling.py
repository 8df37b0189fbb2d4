"""Blocking vertices, domain walls and the cluster resampling move.

Given a loop configuration ``omega``, blocking vertices ``xi`` live on the
up vertices of the host patch: a whole loop is open with probability
(n-1)/n, an up vertex of degree 0 is open with probability 1 - x^2, and
strands that leave the patch are closed.  The loops covered by ``xi`` are
frozen (``block``); the rest (``free``) are the domain walls of a spin
configuration, and the spins of every cluster of the triangle bond
configuration ``delta(xi)`` lying wholly inside a window are redrawn
uniformly.  The result keeps the Gibbs measure invariant; the exact
push-forward check below certifies this on enumerable domains.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit

from .loopmodel.config import GibbsSpec, LoopConfig, decompose, validate
from .loopmodel.exact import GibbsTable
from .loopmodel.mcmc import MetropolisChain
from .percolation.configs import BondConfig, SiteConfig
from .percolation.sampling import clusters
from .planar.lattice import (UP, HexPatch, ball_faces, edge_key, face_corners, face_neighbors,
                             triangle_faces)
from .rng import make_rng
from .stats import total_variation


# ---------------------------------------------------------------- spins

class SpinConfig:
    """+-1 per face of the host patch and of the ring of faces around it."""

    def __init__(self, host: HexPatch, spins):
        self.host = host
        self.faces = host.extended_faces
        self.index = {f: i for i, f in enumerate(self.faces)}
        spins = np.asarray(spins, dtype=np.int8)
        if spins.shape != (len(self.faces),) or not np.all(np.abs(spins) == 1):
            raise ValueError("one spin in {-1, +1} per extended face")
        self.spins = spins

    def __getitem__(self, f) -> int:
        return int(self.spins[self.index[tuple(f)]])

    def __neg__(self):
        return SpinConfig(self.host, -self.spins)

    def __eq__(self, other):
        return isinstance(other, SpinConfig) and np.array_equal(self.spins, other.spins)

    @classmethod
    def constant(cls, host: HexPatch, s: int = 1) -> "SpinConfig":
        return cls(host, np.full(len(host.extended_faces), s, dtype=np.int8))


def dw(sigma: SpinConfig) -> LoopConfig:
    """Domain walls: host edges separating faces of opposite spin."""
    host = sigma.host
    edges = frozenset(i for i, (f, g) in enumerate(host.edge_list) if sigma[f] != sigma[g])
    return LoopConfig(host, edges, True)


def dw_inverse(omega: LoopConfig, anchor=(0, 0), s: int = 1) -> SpinConfig:
    """The spin configuration with domain walls ``omega`` and ``sigma(anchor) = s``."""
    host = omega.host
    anchor = tuple(anchor)
    faces = host.extended_faces
    idx = {f: i for i, f in enumerate(faces)}
    if anchor not in idx:
        raise ValueError(f"anchor face {anchor!r} is not in the patch")
    if s not in (1, -1):
        raise ValueError("anchor spin must be +1 or -1")
    spins = np.zeros(len(faces), dtype=np.int8)
    spins[idx[anchor]] = s
    stack = [anchor]
    while stack:
        f = stack.pop()
        for g in face_neighbors(f):
            e = host.edge_index.get(edge_key(f, g))
            if e is None or spins[idx[g]] != 0:
                continue
            spins[idx[g]] = -spins[idx[f]] if e in omega.edges else spins[idx[f]]
            stack.append(g)
    sigma = SpinConfig(host, spins)
    if dw(sigma).edges != omega.edges:
        raise ValueError("configuration is not a set of domain walls (a strand leaves the patch)")
    return sigma


# ---------------------------------------------------------------- blocking

@dataclass(frozen=True)
class BlockingConfig:
    """Open blocking vertices (a subset of the host's up vertices)."""

    host: HexPatch
    open: frozenset
    omega: LoopConfig | None = None

    def site_config(self) -> SiteConfig:
        g = self.host.up_graph
        return SiteConfig.from_open(g, self.open)

    def to_json(self) -> str:
        idx = {v: i for i, v in enumerate(self.host.up_vertices)}
        return json.dumps({"open": sorted(idx[v] for v in self.open)})


def up_edges(host: HexPatch, u) -> list[int]:
    """Host edge ids at an up vertex (those present in the patch)."""
    a, b, c = triangle_faces(u)
    out = []
    for f, g in ((a, b), (b, c), (a, c)):
        e = host.edge_index.get(edge_key(f, g))
        if e is not None:
            out.append(e)
    return out


def _components(omega: LoopConfig):
    """Loops and strands of omega with their up vertices."""
    dec, _ = decompose(omega)
    loops = [frozenset(v for v in c if v[2] == UP) for c in dec.loops]
    paths = [frozenset(v for v in p if v[2] == UP) for p in dec.paths]
    return dec, loops, paths


def blocking_probabilities(n: float, x: float) -> tuple[float, float]:
    if n < 1 or x <= 0 or x > 1:
        raise ValueError("blocking probabilities out of range (need n >= 1 and 0 < x <= 1)")
    return (n - 1) / n, 1 - x * x


def sample_xi(omega: LoopConfig, n: float, x: float, seed) -> BlockingConfig:
    """Blocking vertices: one coin per loop, one per degree-0 up vertex.

    Coins are drawn in a fixed order (loops by smallest edge id, then up
    vertices in patch order) so the result depends only on the seed.
    """
    p_loop, p_vertex = blocking_probabilities(n, x)
    rng = make_rng(seed)
    host = omega.host
    dec, loops, _ = _components(omega)
    order = sorted(range(len(loops)), key=lambda i: min(dec.loop_edges[i]))
    u_loop = rng.random(len(loops))
    opened = set()
    for j, i in enumerate(order):
        if u_loop[j] < p_loop:
            opened |= loops[i]
    deg: dict = {}
    for e in omega.edges:
        for v in host.endpoints[e]:
            deg[v] = deg.get(v, 0) + 1
    u_vert = rng.random(len(host.up_vertices))
    for j, u in enumerate(host.up_vertices):
        if deg.get(u, 0) == 0 and u_vert[j] < p_vertex:
            opened.add(u)
    return BlockingConfig(host, frozenset(opened), omega)


def xi_law(omega: LoopConfig, n: float, x: float, vertices: Iterable | None = None):
    """Exact law of ``xi`` restricted to ``vertices`` as ``[(open set, prob), ...]``.

    Loops through the chosen vertices carry one coin each (opening the whole
    loop), degree-0 vertices one coin each, strand vertices stay closed and
    every other vertex is closed.
    """
    p_loop, p_vertex = blocking_probabilities(n, x)
    host = omega.host
    vertices = set(host.up_vertices if vertices is None else vertices)
    _, loops, _ = _components(omega)
    deg: dict = {}
    for e in omega.edges:
        for v in host.endpoints[e]:
            deg[v] = deg.get(v, 0) + 1
    coins = []      # (vertex set, probability of open)
    for L in loops:
        if L & vertices:
            coins.append((L, p_loop))
    for u in sorted(vertices):
        if deg.get(u, 0) == 0:
            coins.append((frozenset([u]), p_vertex))
    out = []
    for bits in itertools.product((0, 1), repeat=len(coins)):
        prob = 1.0
        opened = set()
        for b, (vs, p) in zip(bits, coins):
            prob *= p if b else 1 - p
            if b:
                opened |= vs
        if prob > 0:
            out.append((frozenset(opened), prob))
    return out


def delta(xi: BlockingConfig) -> BondConfig:
    """Triangle edges of the up triangles of open blocking vertices."""
    edges = set()
    for u in xi.open:
        a, b, c = triangle_faces(u)
        edges.update({edge_key(a, b), edge_key(b, c), edge_key(a, c)})
    return BondConfig(frozenset(edges))


def delta_clusters(faces: Iterable, open_up: Iterable) -> dict:
    """Map each face to the smallest face of its cluster in delta(xi)."""
    faces = list(faces)
    parent = {f: f for f in faces}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u in open_up:
        tri = [f for f in triangle_faces(u) if f in parent]
        for f in tri[1:]:
            ra, rb = find(tri[0]), find(f)
            if ra != rb:
                if rb < ra:
                    ra, rb = rb, ra
                parent[rb] = ra
    return {f: find(f) for f in faces}


def xi_clusters(xi: BlockingConfig) -> dict:
    """Map each open up vertex to a cluster id under up-vertex adjacency."""
    g = xi.host.up_graph
    cfg = xi.site_config()
    labels, _ = clusters(cfg, 1)
    return {v: int(labels[g.index[v]]) for v in xi.open}


# ---------------------------------------------------------------- split

@dataclass(frozen=True)
class OmegaSplit:
    free: LoopConfig
    block: LoopConfig
    omega: LoopConfig
    xi: BlockingConfig

    def to_json(self) -> str:
        return json.dumps({"free": sorted(self.free.edges), "block": sorted(self.block.edges)})


def split_omega(omega: LoopConfig, xi: BlockingConfig) -> OmegaSplit:
    """Separate the loops covered by ``xi`` from the rest."""
    dec, loops, paths = _components(omega)
    block = set()
    for L, es in zip(loops, dec.loop_edges):
        covered = L & xi.open
        if covered and covered != L:
            raise ValueError("inconsistent blocking: a loop is only partly covered")
        if covered:
            block |= es
    for P in paths:
        if P & xi.open:
            raise ValueError("inconsistent blocking: an open vertex lies on a strand")
    block = frozenset(block)
    host = omega.host
    return OmegaSplit(LoopConfig(host, omega.edges - block, omega.open_ends),
                      LoopConfig(host, block), omega, xi)


# ---------------------------------------------------------------- resampling

def sigma_tilde(sigma_bc: SpinConfig, xi: BlockingConfig, window: Iterable, seed=None,
                signs: dict | None = None) -> SpinConfig:
    """Redraw the sign of every delta(xi) cluster lying wholly in ``window``.

    Each inside cluster takes the sign drawn for its smallest face (one
    uniform per extended face, in patch order), or ``signs[min face]`` when
    ``signs`` is given.  All other faces keep ``sigma_bc``.
    """
    window = frozenset(tuple(f) for f in window)
    faces = sigma_bc.faces
    rep = delta_clusters(faces, xi.open)
    members: dict = {}
    for f in faces:
        members.setdefault(rep[f], []).append(f)
    if signs is None:
        draws = make_rng(seed).random(len(faces)) if window else np.zeros(0)
        sign_of = {f: (1 if draws[i] < 0.5 else -1) for i, f in enumerate(faces)} if window else {}
    else:
        sign_of = signs
    spins = sigma_bc.spins.copy()
    for r, fs in members.items():
        if all(f in window for f in fs):
            for f in fs:
                spins[sigma_bc.index[f]] = sign_of[r]
    return SpinConfig(sigma_bc.host, spins)


def inside_clusters(host: HexPatch, xi_open, window) -> list[list]:
    """delta(xi) clusters contained in ``window``, each as a sorted face list."""
    window = frozenset(tuple(f) for f in window)
    rep = delta_clusters(host.extended_faces, xi_open)
    members: dict = {}
    for f in host.extended_faces:
        members.setdefault(rep[f], []).append(f)
    return [sorted(fs) for r, fs in sorted(members.items()) if all(f in window for f in fs)]


def check_window(spec: GibbsSpec, window) -> frozenset:
    """Validate a resampling window.

    Every hexagonal edge at a corner of a window face must be a domain edge,
    so that the move only touches edges and vertices whose weight the
    domain controls.  Equivalently each up or down triangle at such a corner
    has at least two of its three faces in the domain.
    """
    window = frozenset(tuple(f) for f in window)
    dom = spec.domain
    for f in window:
        if f not in dom.faces:
            raise ValueError(f"window face {f!r} is outside the domain")
        for c in face_corners(f):
            if sum(g in dom.faces for g in triangle_faces(c)) < 2:
                raise ValueError("the resampling window needs an edge margin inside the domain")
    return window


def default_anchor(host: HexPatch, window) -> tuple:
    if (0, 0) in host.faces:
        return (0, 0)
    return min(window) if window else host.face_list[0]


def resample_given(omega: LoopConfig, xi: BlockingConfig, window, signs: dict | None = None,
                   seed=None, anchor=None) -> LoopConfig:
    """The resampling pipeline for a fixed ``xi`` (and fixed signs if given)."""
    host = omega.host
    window = frozenset(window)
    split = split_omega(omega, xi)
    anchor = default_anchor(host, window) if anchor is None else tuple(anchor)
    sigma_bc = dw_inverse(split.free, anchor, +1)
    st = sigma_tilde(sigma_bc, xi, window, seed=seed, signs=signs)
    walls = dw(st)
    if walls.edges & split.block.edges:
        raise AssertionError("new domain walls overlap frozen loops")
    return validate(walls.edges | split.block.edges, host, omega.open_ends)


def coupled_resample(omega: LoopConfig, spec: GibbsSpec, window, seed) -> LoopConfig:
    """Sample xi, split, redraw inside clusters, glue back."""
    window = check_window(spec, window)
    rng = make_rng(seed)
    xi = sample_xi(omega, spec.n, spec.x, rng)
    out = resample_given(omega, xi, window, seed=rng)
    if not (out.edges ^ spec.boundary) <= spec.domain.edges:
        raise AssertionError("resampling changed the configuration outside the domain")
    return out


def resample_shortcut(omega: LoopConfig, xi_open, window, flips: dict) -> frozenset:
    """Closed form of the pipeline: omega plus the boundary of the flipped
    inside clusters (``flips[smallest face]`` true means flipped)."""
    host = omega.host
    edges = set(omega.edges)
    for fs in inside_clusters(host, xi_open, window):
        if flips[fs[0]]:
            for f in fs:
                edges.symmetric_difference_update(host.face_edge_ids(f))
    return frozenset(edges)


def relevant_up_vertices(host: HexPatch, window) -> list:
    """Up vertices whose triangle meets the window (only these affect the move)."""
    window = set(window)
    return [u for u in host.up_vertices if any(f in window for f in triangle_faces(u))]


def kernel_exact(omega: LoopConfig, spec: GibbsSpec, window, vertices=None) -> list:
    """Exact output law of ``coupled_resample`` from ``omega``, via the pipeline.

    ``xi`` is enumerated on ``vertices`` (default: the up vertices meeting
    the window, all others closed) and every sign pattern of the inside
    clusters is pushed through ``resample_given``.
    """
    window = check_window(spec, window)
    host = omega.host
    if vertices is None:
        vertices = relevant_up_vertices(host, window)
    acc: dict = {}
    for opened, p in xi_law(omega, spec.n, spec.x, vertices):
        xi = BlockingConfig(host, opened, omega)
        inside = inside_clusters(host, opened, window)
        q = p / (1 << len(inside))
        for bits in itertools.product((1, -1), repeat=len(inside)):
            signs = {fs[0]: b for fs, b in zip(inside, bits)}
            out = resample_given(omega, xi, window, signs=signs).edges
            acc[out] = acc.get(out, 0.0) + q
    return list(acc.items())


def pushforward_tv(table: GibbsTable, window, vertices=None) -> float:
    """Exact TV distance between the Gibbs table and its image under the move."""
    spec = table.spec
    host = spec.host

    def kernel(edges):
        return kernel_exact(LoopConfig(host, edges, True), spec, window, vertices)

    image = table.pushforward(kernel)
    a = np.array([image.prob(c) if c in image._lookup() else 0.0 for c in table.configs])
    extra = sum(p for c, p in zip(image.configs, image.probs) if c not in table._lookup())
    return total_variation(a, table.probs) + 0.5 * extra


def law_equality_report(table: GibbsTable, window, tolerance: float = 1e-9) -> dict:
    tv = pushforward_tv(table, window)
    return {"n": table.spec.n, "x": table.spec.x, "tv_exact": tv, "tv_tolerance": tolerance,
            "pass": bool(tv <= tolerance)}


def conditional_weight(omega_block: LoopConfig, xi_open, n: float, x: float) -> float:
    """(n-1)^(frozen loops) * (1/x^2 - 1)^(open vertices off the frozen loops)."""
    _, loops, _ = _components(omega_block)
    on_block = frozenset().union(*loops) if loops else frozenset()
    extra = len(frozenset(xi_open) - on_block)
    a = 1.0 if not loops else (n - 1) ** len(loops)
    b = 1.0 if extra == 0 else (1 / (x * x) - 1) ** extra
    return a * b


# ---------------------------------------------------------------- fast move

class FastResampler:
    """Compiled version of the move for long runs on a fixed window.

    Equivalent to ``coupled_resample`` (checked against ``resample_given``
    in the tests), with coins read from a uniform array: slot ``j`` of the
    up vertices meeting the window decides that vertex (or its loop, using
    the first such vertex on the loop), then one slot per window face gives
    the sign of the cluster whose smallest face it is.
    """

    def __init__(self, spec: GibbsSpec, window):
        self.spec = spec
        window = check_window(spec, window)
        host = spec.host
        self.window = sorted(window)
        self.R = relevant_up_vertices(host, window)
        faces = sorted({f for u in self.R for f in triangle_faces(u)} | set(window))
        self.faces = faces
        fidx = {f: i for i, f in enumerate(faces)}
        self.tri = np.array([[fidx[f] for f in triangle_faces(u)] for u in self.R],
                            dtype=np.int64).reshape(-1, 3)
        self.r_vertex = np.array([host.vertex_index[u] for u in self.R], dtype=np.int64)
        self.in_window = np.array([f in window for f in faces], dtype=np.bool_)
        self.face_slot = np.array([self.window.index(f) if f in window else -1 for f in faces],
                                  dtype=np.int64)
        self.hex_edges = np.array([host.face_edge_ids(f) if f in window else [-1] * 6
                                   for f in faces], dtype=np.int64).reshape(-1, 6)
        V = len(host.vertex_list)
        self.vedges = -np.ones((V, 3), dtype=np.int64)
        for v, es in enumerate(host.vertex_edges):
            self.vedges[v, :len(es)] = es
        self.ends = np.array([[host.vertex_index[a], host.vertex_index[b]]
                              for a, b in host.endpoints], dtype=np.int64).reshape(-1, 2)
        self.p_loop, self.p_vertex = blocking_probabilities(spec.n, spec.x)
        self.n_slots = len(self.R) + len(self.window)

    def apply(self, rows: np.ndarray, rounds: int, seed) -> np.ndarray:
        """Apply ``rounds`` moves to each edge-state row (in place) and return rows."""
        rng = make_rng(seed)
        us = rng.random((rows.shape[0], rounds, self.n_slots))
        _fast_rounds(rows, us, self.r_vertex, self.tri, self.in_window, self.face_slot,
                     self.hex_edges, self.vedges, self.ends, self.p_loop, self.p_vertex,
                     len(self.R))
        return rows

    def apply_given(self, state: np.ndarray, us: np.ndarray) -> np.ndarray:
        rows = state.reshape(1, -1).copy()
        _fast_rounds(rows, us.reshape(1, 1, -1), self.r_vertex, self.tri, self.in_window,
                     self.face_slot, self.hex_edges, self.vedges, self.ends, self.p_loop,
                     self.p_vertex, len(self.R))
        return rows[0]


@njit(cache=True)
def _trace_key(state, vedges, ends, v):
    """(smallest edge id, closed?) of the component through vertex ``v``."""
    e0 = -1
    for j in range(3):
        f = vedges[v, j]
        if f >= 0 and state[f]:
            e0 = f
            break
    best = e0
    closed = False
    for side in range(2):
        u = v
        e = e0
        if side == 1:
            e = -1
            for j in range(3):
                f = vedges[v, j]
                if f >= 0 and state[f] and f != e0:
                    e = f
                    break
            if e < 0:
                break
        while True:
            if e < best:
                best = e
            w = ends[e, 0] if ends[e, 1] == u else ends[e, 1]
            if w == v:
                closed = True
                break
            nxt = -1
            for j in range(3):
                f = vedges[w, j]
                if f >= 0 and state[f] and f != e:
                    nxt = f
                    break
            if nxt < 0:
                break
            u = w
            e = nxt
        if closed:
            break
    return best, closed


@njit(cache=True)
def _find_root(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def _fast_rounds(rows, us, r_vertex, tri, in_window, face_slot, hex_edges, vedges, ends,
                 p_loop, p_vertex, nR):
    N = rows.shape[0]
    rounds = us.shape[1]
    nF = in_window.shape[0]
    keys = np.empty(nR, dtype=np.int64)
    opened = np.empty(nR, dtype=np.bool_)
    parent = np.empty(nF, dtype=np.int64)
    ok = np.empty(nF, dtype=np.bool_)
    minslot = np.empty(nF, dtype=np.int64)
    for s in range(N):
        state = rows[s]
        for t in range(rounds):
            u = us[s, t]
            for j in range(nR):
                v = r_vertex[j]
                deg = 0
                for q in range(3):
                    f = vedges[v, q]
                    if f >= 0 and state[f]:
                        deg += 1
                if deg == 0:
                    keys[j] = -1
                    opened[j] = u[j] < p_vertex
                else:
                    key, closed = _trace_key(state, vedges, ends, v)
                    keys[j] = key
                    if not closed:
                        opened[j] = False
                    else:
                        dec = u[j] < p_loop
                        for i in range(j):
                            if keys[i] == key:
                                dec = opened[i]
                                break
                        opened[j] = dec
            for i in range(nF):
                parent[i] = i
            for j in range(nR):
                if opened[j]:
                    a = _find_root(parent, tri[j, 0])
                    for q in range(1, 3):
                        b = _find_root(parent, tri[j, q])
                        if a != b:
                            parent[b] = a
            for i in range(nF):
                ok[i] = True
                minslot[i] = -1
            for i in range(nF):
                r = _find_root(parent, i)
                if not in_window[i]:
                    ok[r] = False
                elif minslot[r] < 0 or face_slot[i] < minslot[r]:
                    minslot[r] = face_slot[i]
            for i in range(nF):
                if not in_window[i]:
                    continue
                r = _find_root(parent, i)
                if ok[r] and u[nR + minslot[r]] >= 0.5:
                    for q in range(6):
                        state[hex_edges[i, q]] ^= 1
    return rows


# ---------------------------------------------------------------- statistics

def cluster_crosses(host: HexPatch, xi_open, inner, outside) -> bool:
    """Does some delta(xi) cluster contain a face of ``inner`` and a face of ``outside``?"""
    rep = delta_clusters(host.extended_faces, xi_open)
    a = {rep[f] for f in inner if f in rep}
    return any(rep[f] in a for f in outside if f in rep)


def blocking_crossing(r: int, n: float, x: float, samples: int, seed, burnin: int = 1000,
                      gap: int = 10) -> dict:
    """Frequency with which a delta(xi) cluster crosses the annulus A_r.

    Loop configurations are drawn on B_{2r+1} (empty boundary); a crossing
    is a cluster holding a face of B_r and a face outside B_{2r}.
    """
    spec = GibbsSpec.ball(2 * r + 1, n, x)
    host = spec.host
    chain = MetropolisChain(spec, None, seed, 0)
    chain.run(burnin)
    _, rows = chain.sample(samples, gap, record_edges=True)
    rng = make_rng(seed, 1)
    inner = ball_faces(r)
    outside = [f for f in host.extended_faces if f not in ball_faces(2 * r)]
    hits = 0
    largest = []
    for row in rows:
        omega = LoopConfig(host, frozenset(np.flatnonzero(row).tolist()), True)
        xi = sample_xi(omega, n, x, rng)
        hits += cluster_crosses(host, xi.open, inner, outside)
        rep = delta_clusters(host.faces, xi.open)
        sizes: dict = {}
        for f, rt in rep.items():
            sizes[rt] = sizes.get(rt, 0) + 1
        largest.append(max(sizes.values()) / len(host.faces))
    est = hits / samples
    return {"r": r, "n": n, "x": x, "crossing": est, "se": math.sqrt(est * (1 - est) / samples),
            "largest_fraction": float(np.mean(largest)), "samples": samples}
