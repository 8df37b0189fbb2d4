"""Compiled connectivity kernels over CSR adjacency.

All kernels take ``indptr``/``indices`` from ``Graph.csr()`` and a per-vertex
state array, and never allocate per-vertex Python objects.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True)
def component_labels(indptr, indices, ok):
    """Union-find labels of the subgraph induced on ``ok`` vertices.

    Returns labels in 0..C-1 numbered by smallest member, -1 off ``ok``.
    """
    n = ok.shape[0]
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for u in range(n):
        if not ok[u]:
            continue
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if v < u and ok[v]:
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru != rv:
                    if size[ru] < size[rv]:
                        ru, rv = rv, ru
                    parent[rv] = ru
                    size[ru] += size[rv]
    labels = -np.ones(n, dtype=np.int64)
    root_label = -np.ones(n, dtype=np.int64)
    count = 0
    for u in range(n):
        if ok[u]:
            r = _find(parent, u)
            if root_label[r] < 0:
                root_label[r] = count
                count += 1
            labels[u] = root_label[r]
    return labels


@njit(cache=True)
def _reach(indptr, indices, ok, seeds, stack, seen):
    top = 0
    for u in range(ok.shape[0]):
        seen[u] = False
    for u in range(ok.shape[0]):
        if seeds[u] and ok[u]:
            seen[u] = True
            stack[top] = u
            top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if ok[v] and not seen[v]:
                seen[v] = True
                stack[top] = v
                top += 1


@njit(cache=True, parallel=True)
def batch_connects(indptr, indices, bits, state, allowed, sources, targets):
    """For each row of ``bits``: is some source joined to some target by a
    path of ``state`` vertices inside ``allowed``?"""
    N, V = bits.shape
    out = np.zeros(N, dtype=np.bool_)
    for s in prange(N):
        ok = np.empty(V, dtype=np.bool_)
        for u in range(V):
            ok[u] = allowed[u] and bits[s, u] == state
        stack = np.empty(V, dtype=np.int64)
        seen = np.empty(V, dtype=np.bool_)
        _reach(indptr, indices, ok, sources, stack, seen)
        hit = False
        for u in range(V):
            if seen[u] and targets[u]:
                hit = True
                break
        out[s] = hit
    return out


@njit(cache=True, parallel=True)
def batch_arm_reach(indptr, indices, bits, state, allowed, outer, S):
    """``out[s, i]``: vertex ``S[i]`` has ``state`` and a ``state`` path from
    it through ``allowed`` vertices reaches ``outer``."""
    N, V = bits.shape
    L = S.shape[0]
    out = np.zeros((N, L), dtype=np.bool_)
    for s in prange(N):
        ok = np.empty(V, dtype=np.bool_)
        for u in range(V):
            ok[u] = allowed[u] and bits[s, u] == state
        stack = np.empty(V, dtype=np.int64)
        seen = np.empty(V, dtype=np.bool_)
        _reach(indptr, indices, ok, outer, stack, seen)
        for i in range(L):
            v = S[i]
            if bits[s, v] != state:
                continue
            if seen[v] and outer[v]:
                out[s, i] = True
                continue
            for p in range(indptr[v], indptr[v + 1]):
                if seen[indices[p]]:
                    out[s, i] = True
                    break
    return out


@njit(cache=True)
def crossing_count(indptr, indices, ok, inner, outer):
    """Number of components of the ``ok`` subgraph meeting both vertex masks."""
    labels = component_labels(indptr, indices, ok)
    C = 0
    for u in range(labels.shape[0]):
        if labels[u] + 1 > C:
            C = labels[u] + 1
    a = np.zeros(C, dtype=np.bool_)
    b = np.zeros(C, dtype=np.bool_)
    for u in range(labels.shape[0]):
        if labels[u] >= 0:
            if inner[u]:
                a[labels[u]] = True
            if outer[u]:
                b[labels[u]] = True
    count = 0
    for c in range(C):
        if a[c] and b[c]:
            count += 1
    return count
