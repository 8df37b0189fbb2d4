"""Uniform spanning trees and finite trifurcation counts."""
from __future__ import annotations

import itertools

import numpy as np

from ..planar.graph import Graph
from ..rng import make_rng
from .configs import SpanningForest


class _Uniforms:
    """Buffered uniform stream; avoids one generator call per walk step."""

    def __init__(self, rng, chunk=4096):
        self.rng = rng
        self.chunk = chunk
        self.buf = rng.random(chunk)
        self.i = 0

    def next(self) -> float:
        if self.i == self.chunk:
            self.buf = self.rng.random(self.chunk)
            self.i = 0
        u = self.buf[self.i]
        self.i += 1
        return u


def wilson_ust(g: Graph, seed, root=None) -> SpanningForest:
    """Uniform spanning tree by loop-erased random walks (Wilson's algorithm)."""
    if not g.vertices:
        raise ValueError("empty graph")
    if not g.is_connected():
        raise ValueError("graph is disconnected")
    rng = make_rng(seed)
    u = _Uniforms(rng)
    V = len(g.vertices)
    adj = g.adj
    r = 0 if root is None else g.index[root]
    in_tree = [False] * V
    in_tree[r] = True
    nxt = [-1] * V
    for start in range(V):
        v = start
        while not in_tree[v]:
            nb = adj[v]
            nxt[v] = nb[int(u.next() * len(nb))]
            v = nxt[v]
        v = start
        while not in_tree[v]:
            in_tree[v] = True
            v = nxt[v]
    verts = g.vertices
    edges = frozenset((verts[v], verts[nxt[v]]) for v in range(V) if v != r)
    return SpanningForest(g, edges)


def spanning_tree_count(g: Graph) -> int:
    """Kirchhoff's matrix-tree count (reduced Laplacian determinant)."""
    V = len(g.vertices)
    if V == 1:
        return 1
    L = np.zeros((V, V))
    for i, nb in enumerate(g.adj):
        L[i, i] = len(nb)
        for j in nb:
            L[i, j] -= 1
    return int(round(np.linalg.det(L[1:, 1:])))


def all_spanning_trees(g: Graph) -> list[frozenset]:
    """Brute-force list of spanning trees as canonical edge sets (small graphs)."""
    V = len(g.vertices)
    edges = [tuple(sorted((g.index[a], g.index[b]))) for a, b in g.edges]
    out = []
    for subset in itertools.combinations(range(len(edges)), V - 1):
        parent = list(range(V))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        ok = True
        for k in subset:
            a, b = find(edges[k][0]), find(edges[k][1])
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            out.append(frozenset(tuple(sorted((g.vertices[edges[k][0]], g.vertices[edges[k][1]])))
                                 for k in subset))
    return out


def trifurcations(f: SpanningForest, K, B) -> set:
    """Vertices of ``K`` whose deletion splits their forest component into at
    least three pieces that each meet ``B``."""
    K = set(K)
    B = set(B)
    adj = f.adjacency()
    out = set()
    seen = set()
    for start in adj:
        if start in seen:
            continue
        # root the component and count B-vertices per subtree
        order, parent = [start], {start: None}
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for w in adj[v]:
                if w not in parent:
                    parent[w] = v
                    order.append(w)
        seen.update(order)
        below = {v: int(v in B) for v in order}
        for v in reversed(order[1:]):
            below[parent[v]] += below[v]
        total = below[start]
        for v in order:
            if v not in K:
                continue
            pieces = sum(1 for w in adj[v] if w != parent[v] and below[w] > 0)
            if parent[v] is not None and total - below[v] > 0:
                pieces += 1
            if pieces >= 3:
                out.add(v)
    return out


def vertex_boundary(g: Graph, K) -> set:
    """Vertices of ``K`` adjacent to a vertex outside ``K``."""
    K = set(K)
    return {v for v in K if any(w not in K for w in g.neighbors(v))}


def trifurcation_bound_check(f: SpanningForest, K, ambient: Graph) -> bool:
    B = vertex_boundary(ambient, K)
    return len(trifurcations(f, K, B)) <= len(B)
