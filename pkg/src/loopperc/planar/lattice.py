"""Hexagonal lattice patches, the dual triangular lattice and loop geometry.

Faces of the hexagonal lattice are labelled by axial pairs ``(k, l)`` for the
centre ``k + l*exp(i*pi/3)``; these are also the vertices of the triangular
lattice T.  A hexagonal vertex is the centre of a triangle of T and is
written ``(k, l, UP)`` for the up-pointing triangle
``{(k,l), (k+1,l), (k,l+1)}`` or ``(k, l, DOWN)`` for the down-pointing one
``{(k+1,l), (k,l+1), (k+1,l+1)}``.  UP vertices are the top endpoints of
vertical edges and form the sublattice T↑.  A hexagonal edge is labelled by
the T-edge it crosses: the sorted pair of the two faces it separates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .graph import PlanarGraph

UP, DOWN = 0, 1

# lattice directions of T, counterclockwise from east
DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def add(f, d):
    return (f[0] + d[0], f[1] + d[1])


def face_neighbors(f) -> list:
    return [add(f, d) for d in DIRECTIONS]


def edge_key(f, g) -> tuple:
    """Canonical label of the hexagonal edge separating faces ``f`` and ``g``."""
    return (f, g) if f < g else (g, f)


def triangle_faces(v) -> tuple:
    k, l, kind = v
    if kind == UP:
        return ((k, l), (k + 1, l), (k, l + 1))
    return ((k + 1, l), (k, l + 1), (k + 1, l + 1))


def face_corners(f) -> list:
    """The six hexagonal vertices around face ``f``, counterclockwise.

    Corner ``i`` sits between directions ``i`` and ``i+1``.
    """
    k, l = f
    return [(k, l, UP), (k - 1, l, DOWN), (k - 1, l, UP),
            (k - 1, l - 1, DOWN), (k, l - 1, UP), (k, l - 1, DOWN)]


def face_edges(f) -> list:
    """Hexagon edges of face ``f``; edge ``i`` crosses direction ``i``."""
    return [edge_key(f, add(f, d)) for d in DIRECTIONS]


def edge_endpoints(e) -> tuple:
    """The two hexagonal vertices of edge ``e`` (UP endpoint first)."""
    f, g = e
    d = (g[0] - f[0], g[1] - f[1])
    i = DIRECTIONS.index(d)
    corners = face_corners(f)
    a, b = corners[i - 1], corners[i]
    return (a, b) if a[2] == UP else (b, a)


def vertex_position(v) -> tuple:
    """Exact integer plane coordinates (an orientation-preserving affine image)."""
    k, l, kind = v
    a, b = (3 * k + 1, 3 * l + 1) if kind == UP else (3 * k + 2, 3 * l + 2)
    return (2 * a + b, b)


def face_position(f) -> tuple:
    a, b = 3 * f[0], 3 * f[1]
    return (2 * a + b, b)


def ball_faces(r: int) -> frozenset:
    """Faces (k, l) with |k + l| <= r and |k - l| <= r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return frozenset((k, l) for k in range(-r, r + 1) for l in range(-r, r + 1)
                     if abs(k + l) <= r and abs(k - l) <= r)


def annulus(r: int) -> frozenset:
    """Face set of A_r = B_{2r} minus B_r."""
    if r < 1:
        raise ValueError("annulus radius must be positive")
    return ball_faces(2 * r) - ball_faces(r)


class HexPatch:
    """Finite union of hexagonal faces with its vertices, edges and duals."""

    def __init__(self, faces: Iterable):
        self.faces = frozenset(tuple(f) for f in faces)
        if not self.faces:
            raise ValueError("empty patch")
        self.face_list = sorted(self.faces)
        self.face_index = {f: i for i, f in enumerate(self.face_list)}
        verts = {c for f in self.faces for c in face_corners(f)}
        self.vertex_list = sorted(verts)
        self.vertex_index = {v: i for i, v in enumerate(self.vertex_list)}
        edges = {e for f in self.faces for e in face_edges(f)}
        self.edge_list = sorted(edges)
        self.edge_index = {e: i for i, e in enumerate(self.edge_list)}
        self.endpoints = [edge_endpoints(e) for e in self.edge_list]
        self.vertex_edges: list[list[int]] = [[] for _ in self.vertex_list]
        for ei, (a, b) in enumerate(self.endpoints):
            self.vertex_edges[self.vertex_index[a]].append(ei)
            self.vertex_edges[self.vertex_index[b]].append(ei)
        # faces outside the patch that share an edge with it
        self.ring = frozenset(g for f in self.faces for g in face_neighbors(f)) - self.faces
        self.extended_faces = sorted(self.faces | self.ring)
        self.up_vertices = [v for v in self.vertex_list if v[2] == UP]

    @classmethod
    def ball(cls, r: int) -> "HexPatch":
        return cls(ball_faces(r))

    def __repr__(self):
        return f"HexPatch({len(self.faces)} faces)"

    @property
    def n_edges(self):
        return len(self.edge_list)

    def degree(self, v) -> int:
        return len(self.vertex_edges[self.vertex_index[v]])

    @cached_property
    def open_ends(self) -> frozenset:
        """Vertices with fewer than three patch edges (where strands may leave)."""
        return frozenset(v for v in self.vertex_list if self.degree(v) < 3)

    def face_edge_ids(self, f) -> list[int]:
        return [self.edge_index[e] for e in face_edges(f)]

    @cached_property
    def graph(self) -> PlanarGraph:
        edges = [self.endpoints[i] for i in range(self.n_edges)]
        pos = {v: vertex_position(v) for v in self.vertex_list}
        return PlanarGraph(self.vertex_list, edges, positions=pos)

    @cached_property
    def dual(self) -> PlanarGraph:
        """Triangular lattice on the patch faces (nearest-neighbour edges)."""
        return triangular_graph(self.faces)

    @cached_property
    def up_graph(self) -> PlanarGraph:
        """T↑: the up vertices of the patch with triangular-lattice adjacency."""
        ups = set(self.up_vertices)
        edges = []
        for v in self.up_vertices:
            for d in DIRECTIONS[:3]:
                w = (v[0] + d[0], v[1] + d[1], UP)
                if w in ups:
                    edges.append((v, w))
        pos = {v: vertex_position(v) for v in self.up_vertices}
        return PlanarGraph(self.up_vertices, edges, positions=pos)

    def to_json(self) -> str:
        return json.dumps({"faces": [list(f) for f in self.face_list]})

    @classmethod
    def from_json(cls, text: str) -> "HexPatch":
        return cls(tuple(f) for f in json.loads(text)["faces"])


def build_hex_patch(r: int) -> HexPatch:
    return HexPatch.ball(r)


def triangular_graph(sites: Iterable) -> PlanarGraph:
    """Triangular lattice induced on the given axial sites."""
    sites = sorted(set(sites))
    present = set(sites)
    edges = []
    for f in sites:
        for d in DIRECTIONS[:3]:
            g = add(f, d)
            if g in present:
                edges.append((f, g))
    pos = {f: face_position(f) for f in sites}
    return PlanarGraph(sites, edges, positions=pos)


def triangular_ball(R: int) -> PlanarGraph:
    """Combinatorial ball of radius ``R`` about the origin in T (a hexagon)."""
    sites = [(k, l) for k in range(-R, R + 1) for l in range(-R, R + 1)
             if max(abs(k), abs(l), abs(k + l)) <= R]
    return triangular_graph(sites)


def triangular_rhombus(L: int) -> PlanarGraph:
    """L x L rhombus of T with sites (k, l), 0 <= k, l < L."""
    return triangular_graph((k, l) for k in range(L) for l in range(L))


@dataclass(frozen=True)
class Domain:
    """Simply connected union of faces inside a host patch."""

    host: HexPatch
    faces: frozenset
    vertices: frozenset = field(init=False)
    edges: frozenset = field(init=False)          # edge ids in the host patch

    def __post_init__(self):
        faces = frozenset(tuple(f) for f in self.faces)
        object.__setattr__(self, "faces", faces)
        if not faces:
            raise ValueError("empty domain")
        if not faces <= self.host.faces:
            raise ValueError("domain faces must lie in the host patch")
        if not _faces_connected(faces):
            raise ValueError("domain faces are not connected")
        if not _complement_connected(faces):
            raise ValueError("domain is not simply connected")
        object.__setattr__(self, "vertices",
                           frozenset(c for f in faces for c in face_corners(f)))
        object.__setattr__(self, "edges",
                           frozenset(self.host.edge_index[e] for f in faces for e in face_edges(f)))

    def __hash__(self):
        return hash((tuple(sorted(self.faces)), len(self.host.faces)))

    @cached_property
    def boundary_cycle(self) -> tuple:
        """Boundary cycle J, clockwise, starting at the lexicographically least vertex."""
        sub = HexPatch(self.faces).graph
        walk = sub.outer_walk()
        i0 = walk.index(min(walk))
        return tuple(walk[i0:] + walk[:i0])

    @cached_property
    def boundary_vertices(self) -> frozenset:
        return frozenset(self.boundary_cycle)

    @cached_property
    def interior_up_vertices(self) -> frozenset:
        return frozenset(v for v in self.vertices if v[2] == UP and v not in self.boundary_vertices)


def domain_ball(r: int, margin: int = 1) -> Domain:
    """B_r as a domain inside the host patch B_{r+margin}."""
    return Domain(HexPatch.ball(r + margin), ball_faces(r))


def _faces_connected(faces: frozenset) -> bool:
    start = next(iter(faces))
    seen = {start}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in face_neighbors(f):
            if g in faces and g not in seen:
                seen.add(g)
                stack.append(g)
    return len(seen) == len(faces)


def _complement_connected(faces: frozenset) -> bool:
    ks = [f[0] for f in faces]
    ls = [f[1] for f in faces]
    k0, k1, l0, l1 = min(ks) - 2, max(ks) + 2, min(ls) - 2, max(ls) + 2
    box = {(k, l) for k in range(k0, k1 + 1) for l in range(l0, l1 + 1)} - faces
    start = (k0, l0)
    seen = {start}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in face_neighbors(f):
            if g in box and g not in seen:
                seen.add(g)
                stack.append(g)
    return len(seen) == len(box)


def loop_edges(cycle) -> list:
    """Edge labels of a closed vertex cycle; raises if it is not a simple cycle."""
    cycle = list(cycle)
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        raise ValueError("not a simple cycle")
    out = []
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        fa, fb = set(triangle_faces(a)), set(triangle_faces(b))
        shared = fa & fb
        if len(shared) != 2 or a[2] == b[2]:
            raise ValueError(f"{a!r} and {b!r} are not adjacent")
        out.append(edge_key(*sorted(shared)))
    return out


def ray_crossings(edges: set, f, direction: int = 0) -> int:
    """Loop edges crossed by the ray from the centre of ``f`` along a lattice direction.

    The ray runs along T-edges, crossing each hexagonal edge dual to them
    at its midpoint and never passing through a hexagonal vertex.
    """
    if not edges:
        return 0
    d = DIRECTIONS[direction]
    faces = [g for e in edges for g in e]
    span = max(max(abs(g[0] - f[0]), abs(g[1] - f[1])) for g in faces) + 1
    count = 0
    cur = f
    for _ in range(span + 1):
        nxt = add(cur, d)
        if edge_key(cur, nxt) in edges:
            count += 1
        cur = nxt
    return count


def surrounds(loop, f, direction: int = 0) -> bool:
    """True iff face ``f`` lies in the bounded interior of the simple cycle ``loop``.

    ``loop`` is a vertex cycle or a collection of edge labels forming one.
    """
    loop = list(loop)
    if loop and len(loop[0]) == 3:
        edges = set(loop_edges(loop))
    else:
        edges = set(loop)
        _check_simple_edge_cycle(edges)
    return ray_crossings(edges, f, direction) % 2 == 1


def _check_simple_edge_cycle(edges: set):
    deg: dict = {}
    for e in edges:
        for v in edge_endpoints(e):
            deg[v] = deg.get(v, 0) + 1
    if not edges or any(d != 2 for d in deg.values()):
        raise ValueError("not a simple cycle")
    adj: dict = {}
    for e in edges:
        a, b = edge_endpoints(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(adj):
        raise ValueError("not a simple cycle (several components)")
