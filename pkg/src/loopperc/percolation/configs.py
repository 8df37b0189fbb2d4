"""Site and bond configurations, partitions, exact measures, forests."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..planar.graph import Graph


class SiteConfig:
    """One bit per vertex of ``host`` (1 = open)."""

    __slots__ = ("host", "bits")

    def __init__(self, host: Graph, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (len(host.vertices),):
            raise ValueError("site configuration must have one bit per host vertex")
        if bits.size and bits.max() > 1:
            raise ValueError("site states must be 0 or 1")
        self.host = host
        self.bits = bits

    @classmethod
    def from_open(cls, host: Graph, open_vertices: Iterable) -> "SiteConfig":
        bits = np.zeros(len(host.vertices), dtype=np.uint8)
        for v in open_vertices:
            bits[host.index[v]] = 1
        return cls(host, bits)

    def __getitem__(self, v) -> int:
        return int(self.bits[self.host.index[v]])

    def __eq__(self, other):
        return (isinstance(other, SiteConfig) and self.host is other.host
                and np.array_equal(self.bits, other.bits))

    def __le__(self, other: "SiteConfig") -> bool:
        return bool(np.all(self.bits <= other.bits))

    def complement(self) -> "SiteConfig":
        return SiteConfig(self.host, 1 - self.bits)

    def open_set(self) -> set:
        return {self.host.vertices[i] for i in np.flatnonzero(self.bits)}

    def __repr__(self):
        return f"SiteConfig({int(self.bits.sum())}/{self.bits.size} open)"


@dataclass(frozen=True)
class BondConfig:
    """Set of open edges of a host graph, given by edge labels."""

    edges: frozenset

    def __len__(self):
        return len(self.edges)

    def vertices(self) -> set:
        return {v for e in self.edges for v in e}


class Partition:
    """Equivalence relation on the host vertices, one class label per vertex."""

    def __init__(self, host: Graph, labels: Sequence):
        if len(labels) != len(host.vertices):
            raise ValueError("partition needs one label per vertex")
        self.host = host
        self.labels = tuple(labels)

    @classmethod
    def singletons(cls, host: Graph) -> "Partition":
        return cls(host, range(len(host.vertices)))

    @classmethod
    def single_class(cls, host: Graph) -> "Partition":
        return cls(host, [0] * len(host.vertices))

    def classes(self) -> list[list[int]]:
        """Vertex indices per class, classes ordered by first occurrence."""
        order: dict = {}
        for i, lab in enumerate(self.labels):
            order.setdefault(lab, []).append(i)
        return list(order.values())


class ExactMeasure:
    """Explicit probability table over finitely many configurations."""

    def __init__(self, configs: Sequence, probs, atol: float = 1e-12):
        probs = np.asarray(probs, dtype=float)
        if len(configs) != probs.size:
            raise ValueError("one probability per configuration")
        if np.any(probs < 0):
            raise ValueError("negative probability")
        if abs(probs.sum() - 1.0) > atol:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        self.configs = list(configs)
        self.probs = probs
        self._index = None

    def __len__(self):
        return len(self.configs)

    def index(self, config) -> int:
        if self._index is None:
            self._index = {c: i for i, c in enumerate(self.configs)}
        return self._index[config]

    def prob(self, config) -> float:
        return float(self.probs[self.index(config)])

    def expect(self, fn) -> float:
        return float(sum(p * fn(c) for c, p in zip(self.configs, self.probs)))

    def pushforward(self, kernel) -> "ExactMeasure":
        """Image under a kernel mapping a configuration to ``[(config, prob), ...]``."""
        acc: dict = {c: 0.0 for c in self.configs}
        for c, p in zip(self.configs, self.probs):
            for c2, q in kernel(c):
                acc[c2] = acc.get(c2, 0.0) + p * q
        configs = list(acc)
        return ExactMeasure(configs, [acc[c] for c in configs], atol=1e-9)

    def aligned(self, other: "ExactMeasure") -> tuple[np.ndarray, np.ndarray]:
        keys = list(dict.fromkeys(list(self.configs) + list(other.configs)))
        a = np.array([self.prob(k) if k in self._lookup() else 0.0 for k in keys])
        b = np.array([other.prob(k) if k in other._lookup() else 0.0 for k in keys])
        return a, b

    def _lookup(self):
        if self._index is None:
            self.index(self.configs[0])
        return self._index

    def to_json(self) -> str:
        def enc(c):
            if isinstance(c, (frozenset, set)):
                return sorted(c)
            return list(c) if isinstance(c, tuple) else c
        return json.dumps({"configs": [enc(c) for c in self.configs],
                           "probs": [float(p) for p in self.probs]})

    @classmethod
    def from_json(cls, text: str, as_sets: bool = False) -> "ExactMeasure":
        data = json.loads(text)
        dec = frozenset if as_sets else tuple
        return cls([dec(c) for c in data["configs"]], data["probs"])


@dataclass(frozen=True)
class SpanningForest:
    """Acyclic edge subset of a host graph."""

    host: Graph
    edges: frozenset

    def __post_init__(self):
        parent = {}

        def find(a):
            while parent.get(a, a) != a:
                a = parent[a]
            return a

        for u, v in self.edges:
            if u not in self.host or v not in self.host:
                raise ValueError("forest edge outside the host graph")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise ValueError("edge set contains a cycle")
            parent[ru] = rv

    def adjacency(self) -> dict:
        adj: dict = {}
        for u, v in self.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        return adj

    def canonical(self) -> frozenset:
        return frozenset(tuple(sorted(e)) for e in self.edges)
