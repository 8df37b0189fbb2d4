"""Finite graphs with a rotation system, face tracing, balls and cut-sets.

Rotation convention: ``rotation[v]`` lists the neighbours of ``v`` in
counterclockwise order.  A dart ``(u, v)`` belongs to the face on its left;
bounded faces are traced counterclockwise and the outer face clockwise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Hashable, Iterable, Sequence

import numpy as np

Vertex = Hashable
Dart = tuple


class Graph:
    """Simple undirected graph on hashable vertex keys.

    Vertices are kept in the given order; ``index`` maps a key to its
    position, and ``adj`` holds integer neighbour lists in the same order as
    ``neighbors``.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple]):
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        if len(self.index) != len(self.vertices):
            raise ValueError("duplicate vertex keys")
        seen = set()
        self.edges = []
        self.adj: list[list[int]] = [[] for _ in self.vertices]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            iu, iv = self.index[u], self.index[v]
            key = (min(iu, iv), max(iu, iv))
            if key in seen:
                raise ValueError(f"multiple edge {u!r}-{v!r}")
            seen.add(key)
            self.edges.append((u, v))
            self.adj[iu].append(iv)
            self.adj[iv].append(iu)
        self._csr = None

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self.index

    def neighbors(self, v) -> list:
        return [self.vertices[j] for j in self.adj[self.index[v]]]

    def degree(self, v) -> int:
        return len(self.adj[self.index[v]])

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in compressed sparse row form (indptr, indices)."""
        if self._csr is None:
            indptr = np.zeros(len(self.vertices) + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(a) for a in self.adj])
            indices = np.fromiter((j for a in self.adj for j in a), dtype=np.int64,
                                  count=int(indptr[-1]))
            self._csr = (indptr, indices)
        return self._csr

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in self.adj[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(self.vertices)

    def subgraph(self, keep: Iterable[Vertex]) -> "Graph":
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        edges = [(u, v) for u, v in self.edges if u in keep and v in keep]
        return Graph(verts, edges)


def _ccw_sort(center, points: Sequence, pos) -> list:
    """Sort ``points`` counterclockwise around ``center`` by exact arithmetic."""
    cx, cy = pos[center]

    def half(p):
        dx, dy = pos[p][0] - cx, pos[p][1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    def cmp(a, b):
        ha, hb = half(a), half(b)
        if ha != hb:
            return ha - hb
        ax, ay = pos[a][0] - cx, pos[a][1] - cy
        bx, by = pos[b][0] - cx, pos[b][1] - cy
        cross = ax * by - ay * bx
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return sorted(points, key=cmp_to_key(cmp))


def _signed_area2(walk: Sequence, pos) -> int:
    total = 0
    for i, v in enumerate(walk):
        x0, y0 = pos[v]
        x1, y1 = pos[walk[(i + 1) % len(walk)]]
        total += x0 * y1 - x1 * y0
    return total


class PlanarGraph(Graph):
    """Graph with a rotation system and a designated outer face.

    ``outer`` is a dart lying on the outer face.  When ``positions`` (exact
    integer or rational coordinates) are given, the rotation and the outer
    face are derived from them.
    """

    def __init__(self, vertices, edges, rotation: dict | None = None,
                 outer: Dart | None = None, positions: dict | None = None):
        super().__init__(vertices, edges)
        self.positions = positions
        if rotation is None:
            if positions is None:
                raise ValueError("need a rotation system or vertex positions")
            rotation = {v: _ccw_sort(v, self.neighbors(v), positions) for v in self.vertices}
        self.rotation = {v: list(rotation.get(v, [])) for v in self.vertices}
        self._check_rotation()
        self._faces = None
        if outer is None and positions is not None:
            outer = self._outer_from_positions()
        self.outer = outer

    def _check_rotation(self):
        for v in self.vertices:
            rot = self.rotation[v]
            if sorted(map(self.index.get, rot)) != sorted(self.adj[self.index[v]]) \
                    or len(set(rot)) != len(rot):
                raise ValueError(f"rotation at {v!r} does not list each incident edge exactly once")
        self._pos_in_rot = {v: {u: i for i, u in enumerate(self.rotation[v])}
                            for v in self.vertices}

    def next_dart(self, dart: Dart) -> Dart:
        """Successor of ``dart`` along the face on its left."""
        u, v = dart
        rot = self.rotation[v]
        i = self._pos_in_rot[v][u]
        return (v, rot[i - 1])

    def faces(self) -> list[list[Dart]]:
        if self._faces is None:
            self._faces = trace_faces(self)
        return self._faces

    def face_of_dart(self) -> dict:
        out = {}
        for fi, face in enumerate(self.faces()):
            for d in face:
                out[d] = fi
        return out

    def outer_face_index(self) -> int | None:
        if self.outer is None:
            return None
        return self.face_of_dart()[tuple(self.outer)]

    def outer_walk(self) -> list:
        """Vertices of the outer face walk (dart tails, in walk order)."""
        fi = self.outer_face_index()
        if fi is None:
            raise ValueError("graph has no designated outer face")
        return [d[0] for d in self.faces()[fi]]

    def _outer_from_positions(self):
        if not self.edges:
            return None
        # Outer face: the one traced clockwise, i.e. negative signed area.
        # With several components every component contributes one; take the
        # most negative.
        best, best_area = None, 0
        for face in self.faces():
            area = _signed_area2([d[0] for d in face], self.positions)
            if area < best_area:
                best, best_area = face[0], area
        return best

    def induced(self, keep: Iterable[Vertex]) -> "PlanarGraph":
        """Induced subgraph with the inherited (restricted) rotation system."""
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        edges = [(u, v) for u, v in self.edges if u in keep and v in keep]
        rot = {v: [u for u in self.rotation[v] if u in keep] for v in verts}
        pos = None
        if self.positions is not None:
            pos = {v: self.positions[v] for v in verts}
        sub = PlanarGraph(verts, edges, rotation=rot, outer=None, positions=None)
        sub.positions = pos
        if pos is not None:
            sub.outer = sub._outer_from_positions()
        return sub


def trace_faces(g: PlanarGraph) -> list[list[Dart]]:
    """Partition all darts of ``g`` into faces of its rotation system.

    Raises ``ValueError`` if the rotation system is malformed.
    """
    g._check_rotation()
    darts = [(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges]
    unused = set(darts)
    faces = []
    for start in darts:
        if start not in unused:
            continue
        face = []
        d = start
        while True:
            if d not in unused:
                raise ValueError("face tracing revisited a dart: malformed rotation")
            unused.remove(d)
            face.append(d)
            d = g.next_dart(d)
            if d == start:
                break
        faces.append(face)
    return faces


def euler_characteristic(g: PlanarGraph) -> int:
    """V - E + F over the traced faces (isolated vertices count one face each)."""
    isolated = sum(1 for v in g.vertices if g.degree(v) == 0)
    return len(g.vertices) - len(g.edges) + len(g.faces()) + isolated


def combinatorial_ball(g: Graph, root, n: int) -> tuple[set, set]:
    """Vertices within graph distance ``n`` of ``root`` and the exact-distance shell."""
    if root not in g:
        raise KeyError(root)
    if n < 0:
        raise ValueError("radius must be nonnegative")
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        if dist[v] == n:
            continue
        for u in g.neighbors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    ball = set(dist)
    shell = {v for v, d in dist.items() if d == n}
    return ball, shell


@dataclass(frozen=True)
class CutSet:
    """Domain Omega_n around ``root`` and its ordered boundary cut-set S_n."""

    root: Vertex
    radius: int
    ball: frozenset
    shell: frozenset
    omega: frozenset            # vertices of Omega_n
    exterior: frozenset         # vertices of the outer region Q_n
    walk: tuple                 # boundary walk J_n, clockwise
    S: tuple                    # S_n = J_n ∩ shell, in walk order
    outer_faces: frozenset = field(default=frozenset(), repr=False)

    def __len__(self):
        return len(self.S)


class _DSU:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        parent = self.parent
        parent.setdefault(a, a)
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def cut_set(g: PlanarGraph, root, n: int) -> CutSet:
    """Build Omega_n, its boundary walk J_n and the ordered cut-set S_n.

    The outer face of ``g`` plays the role of the accumulation point: Q_n is
    the region of the sphere minus the ball that contains the outer face.
    """
    ball, shell = combinatorial_ball(g, root, n)
    if g.outer is None:
        raise ValueError("graph has no designated outer face")
    if ball & set(g.outer_walk()):
        raise ValueError("patch too small: the ball reaches the outer boundary")

    faces = g.faces()
    face_of = g.face_of_dart()
    dsu = _DSU()
    # Region graph of the sphere minus the ball: face interiors, edges not
    # in the induced ball, and vertices outside the ball.
    for fi in range(len(faces)):
        dsu.find(("f", fi))
    for v in g.vertices:
        if v not in ball:
            dsu.find(("v", v))
    for u, v in g.edges:
        if u in ball and v in ball:
            continue
        e = ("e", u, v)
        dsu.union(e, ("f", face_of[(u, v)]))
        dsu.union(e, ("f", face_of[(v, u)]))
        for w in (u, v):
            if w not in ball:
                dsu.union(e, ("v", w))
    q_root = dsu.find(("f", face_of[tuple(g.outer)]))
    exterior = frozenset(v for v in g.vertices if v not in ball and dsu.find(("v", v)) == q_root)
    outer_faces = frozenset(fi for fi in range(len(faces)) if dsu.find(("f", fi)) == q_root)
    omega = frozenset(g.vertices) - exterior

    ball_edges = [(u, v) for u, v in g.edges if u in ball and v in ball]
    if not ball_edges:
        walk = (root,)
    else:
        sub = g.induced(ball)
        start = None
        for u, v in ball_edges:
            for d in ((u, v), (v, u)):
                if face_of[d] in outer_faces:
                    start = d
                    break
            if start is not None:
                break
        if start is None:
            raise ValueError("outer region does not touch the ball")
        darts = [start]
        d = sub.next_dart(start)
        while d != start:
            darts.append(d)
            d = sub.next_dart(d)
        walk = tuple(d[0] for d in darts)

    on_shell = [v for v in walk if v in shell]
    if len(set(on_shell)) != len(on_shell):
        raise AssertionError("a cut-set vertex is covered twice by the boundary walk")
    if on_shell:
        i0 = on_shell.index(min(on_shell))
        on_shell = on_shell[i0:] + on_shell[:i0]
        j0 = walk.index(on_shell[0])
        walk = walk[j0:] + walk[:j0]
    return CutSet(root=root, radius=n, ball=frozenset(ball), shell=frozenset(shell),
                  omega=omega, exterior=exterior, walk=walk, S=tuple(on_shell),
                  outer_faces=outer_faces)
