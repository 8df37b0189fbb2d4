"""Exact enumeration of the loop O(n) measure on small domains.

Every completion of the boundary condition differs from it by an even
edge set inside the domain, i.e. by the boundary of a set of domain faces.
Distinct face sets give distinct boundaries, so the states are indexed by
integer codes: bit ``i`` set means face ``faces[i]`` (sorted order) is in
the set.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from ..percolation.configs import ExactMeasure
from ..planar.lattice import edge_key, face_neighbors
from .config import GibbsSpec, LoopConfig, log_weight

MAX_FACES = 16


class GibbsTable(ExactMeasure):
    """Exact Gibbs measure with its partition function and face-set codes."""

    def __init__(self, spec: GibbsSpec, configs, log_weights):
        self.spec = spec
        self.log_weights = np.asarray(log_weights, dtype=float)
        self.log_z = float(logsumexp(self.log_weights))
        super().__init__(configs, np.exp(self.log_weights - self.log_z), atol=1e-12)

    @property
    def Z(self) -> float:
        return float(np.exp(self.log_z))

    def code_of(self, omega) -> int:
        edges = omega.edges if isinstance(omega, LoopConfig) else frozenset(omega)
        return self.index(edges)


def state_from_code(spec: GibbsSpec, code: int) -> frozenset:
    host = spec.host
    edges = set(spec.boundary)
    for i, f in enumerate(spec.faces):
        if code >> i & 1:
            edges.symmetric_difference_update(host.face_edge_ids(f))
    return frozenset(edges)


def enumerate_gibbs(spec: GibbsSpec, max_faces: int = MAX_FACES) -> GibbsTable:
    """All completions of the boundary condition with exact probabilities.

    Configurations are frozensets of host edge ids, listed by face-set code.
    """
    F = len(spec.domain.faces)
    if F > max_faces:
        raise ValueError(f"domain has {F} faces, above the enumeration guard of {max_faces}; "
                         "use the Metropolis sampler instead")
    configs, logw = [], []
    for code in range(1 << F):
        edges = state_from_code(spec, code)
        configs.append(edges)
        logw.append(log_weight(LoopConfig(spec.host, edges, True), spec))
    return GibbsTable(spec, configs, logw)


def face_set_code(spec: GibbsSpec, edges) -> int:
    """Inverse of ``state_from_code``: which domain faces were flipped."""
    diff = frozenset(edges) ^ spec.boundary
    host = spec.host
    if not diff <= spec.domain.edges:
        raise ValueError("configuration differs from the boundary condition outside the domain")
    region = set(host.extended_faces)
    start = min(region - spec.domain.faces)
    inside = {start: 0}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in face_neighbors(f):
            if g in region and g not in inside:
                e = host.edge_index.get(edge_key(f, g))
                inside[g] = inside[f] ^ (1 if e in diff else 0)
                stack.append(g)
    code = 0
    for i, f in enumerate(spec.faces):
        if inside[f]:
            code |= 1 << i
    return code
