"""Loop configurations on hexagonal patches, their decomposition and weight."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

from ..planar.lattice import Domain, HexPatch, ball_faces


@dataclass(frozen=True)
class LoopConfig:
    """Edge subset (host edge ids) with every vertex of degree 0 or 2.

    Degree 1 is tolerated at vertices on the rim of the host patch when
    ``open_ends`` is set: those are strands leaving the patch.
    """

    host: HexPatch = field(compare=False, hash=False, repr=False)
    edges: frozenset
    open_ends: bool = field(default=False, compare=False)

    def __len__(self):
        return len(self.edges)

    def labels(self) -> list:
        return [self.host.edge_list[i] for i in sorted(self.edges)]

    def __xor__(self, other: "LoopConfig") -> frozenset:
        return self.edges ^ other.edges


def _edge_ids(host: HexPatch, omega) -> frozenset:
    if isinstance(omega, LoopConfig):
        return omega.edges
    out = set()
    for e in omega:
        if isinstance(e, (int,)) or hasattr(e, "__index__"):
            i = int(e)
            if not 0 <= i < host.n_edges:
                raise ValueError(f"edge id {i} outside the host patch")
            out.add(i)
        else:
            key = tuple(sorted((tuple(e[0]), tuple(e[1]))))
            if key not in host.edge_index:
                raise ValueError(f"edge {e!r} outside the host patch")
            out.add(host.edge_index[key])
    return frozenset(out)


def vertex_degrees(host: HexPatch, edges) -> dict:
    deg: dict = {}
    for i in edges:
        for v in host.endpoints[i]:
            deg[v] = deg.get(v, 0) + 1
    return deg


def validate(omega, host: HexPatch, allow_open_ends: bool = False) -> LoopConfig:
    """Check the degree constraint and wrap as a LoopConfig."""
    edges = _edge_ids(host, omega)
    for v, d in vertex_degrees(host, edges).items():
        if d == 2:
            continue
        if d == 1 and allow_open_ends and v in host.open_ends:
            continue
        raise ValueError(f"vertex {v!r} has degree {d} in the loop configuration")
    return LoopConfig(host, edges, allow_open_ends)


@dataclass
class LoopDecomposition:
    loops: list              # vertex cycles
    paths: list              # vertex sequences from end to end
    components: list         # vertex sets, loops first then paths
    loop_edges: list         # edge-id sets of the loops
    n_loops_in_domain: int = 0


def decompose(omega: LoopConfig, domain: Domain | None = None) -> tuple[LoopDecomposition, int]:
    """Split into loops and strands; count loops meeting the domain's vertices."""
    host = omega.host
    inc: dict = {}
    for i in omega.edges:
        a, b = host.endpoints[i]
        inc.setdefault(a, []).append(i)
        inc.setdefault(b, []).append(i)
    seen_edges = set()
    loops, paths, comps, ledges = [], [], [], []
    # strands first: start at each degree-1 end
    for v, es in inc.items():
        if len(es) != 1 or es[0] in seen_edges:
            continue
        seq, used = _walk(host, inc, v, es[0])
        seen_edges |= used
        paths.append(seq)
    for i in sorted(omega.edges):
        if i in seen_edges:
            continue
        start = host.endpoints[i][0]
        seq, used = _walk(host, inc, start, i)
        seen_edges |= used
        loops.append(seq[:-1])
        ledges.append(frozenset(used))
    comps = [frozenset(c) for c in loops] + [frozenset(p) for p in paths]
    ell = len(loops)
    if domain is not None:
        ell = sum(1 for c in loops if any(v in domain.vertices for v in c))
    dec = LoopDecomposition(loops, paths, comps, ledges, ell)
    return dec, ell


def _walk(host, inc, v, e):
    seq = [v]
    used = set()
    while True:
        used.add(e)
        a, b = host.endpoints[e]
        v = b if a == v else a
        seq.append(v)
        nxt = [f for f in inc[v] if f not in used]
        if not nxt:
            return seq, used
        e = nxt[0]


@dataclass(frozen=True)
class GibbsSpec:
    """Loop O(n) measure on a domain with boundary condition ``boundary``."""

    domain: Domain
    n: float
    x: float
    boundary: frozenset = frozenset()     # host edge ids of the boundary condition

    def __post_init__(self):
        if not (self.n > 0 and self.x > 0):
            raise ValueError("loop weight n and edge weight x must be positive")
        object.__setattr__(self, "boundary", validate(self.boundary, self.host, True).edges)

    @property
    def host(self) -> HexPatch:
        return self.domain.host

    @classmethod
    def ball(cls, r: int, n: float, x: float, margin: int = 1, boundary=()) -> "GibbsSpec":
        host = HexPatch.ball(r + margin)
        return cls(Domain(host, ball_faces(r)), n, x, _edge_ids(host, boundary))

    @property
    def faces(self) -> list:
        return sorted(self.domain.faces)

    def boundary_config(self) -> LoopConfig:
        return LoopConfig(self.host, self.boundary, True)

    def to_json(self, **extra) -> str:
        d = {"n": self.n, "x": self.x}
        r = _ball_radius(self.domain.faces)
        if r is not None:
            d["r"] = r
        else:
            d["faces"] = [list(f) for f in sorted(self.domain.faces)]
        d["host"] = [list(f) for f in self.host.face_list]
        d["boundary"] = "empty" if not self.boundary else \
            [[list(f), list(g)] for f, g in (self.host.edge_list[i] for i in sorted(self.boundary))]
        d.update(extra)
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "GibbsSpec":
        d = json.loads(text)
        host = HexPatch(tuple(f) for f in d["host"]) if "host" in d else HexPatch.ball(d["r"] + 1)
        faces = ball_faces(d["r"]) if "r" in d else frozenset(tuple(f) for f in d["faces"])
        bnd = d.get("boundary", "empty")
        edges = frozenset() if bnd == "empty" else _edge_ids(host, bnd)
        return cls(Domain(host, faces), float(d["n"]), float(d["x"]), edges)


def _ball_radius(faces) -> int | None:
    r = max(max(abs(k + l), abs(k - l)) for k, l in faces)
    return r if ball_faces(r) == faces else None


def log_weight(omega: LoopConfig, spec: GibbsSpec) -> float:
    """log of n^(loops meeting the domain) * x^(edges inside the domain)."""
    if not (omega.edges ^ spec.boundary) <= spec.domain.edges:
        raise ValueError("configuration differs from the boundary condition outside the domain")
    _, ell = decompose(omega, spec.domain)
    n_edges = len(omega.edges & spec.domain.edges)
    return ell * math.log(spec.n) + n_edges * math.log(spec.x)


def weight(omega: LoopConfig, spec: GibbsSpec) -> float:
    return math.exp(log_weight(omega, spec))


def face_flip(omega: LoopConfig, f, domain: Domain | None = None) -> LoopConfig:
    """Symmetric difference with the hexagon around ``f``."""
    f = tuple(f)
    allowed = domain.faces if domain is not None else omega.host.faces
    if f not in allowed:
        raise ValueError(f"face {f!r} is outside the domain")
    return LoopConfig(omega.host, omega.edges ^ frozenset(omega.host.face_edge_ids(f)),
                      omega.open_ends)


def hexagon(host: HexPatch, f) -> LoopConfig:
    return LoopConfig(host, frozenset(host.face_edge_ids(tuple(f))))


def empty(host: HexPatch) -> LoopConfig:
    return LoopConfig(host, frozenset())


def union(configs: Iterable[LoopConfig]) -> LoopConfig:
    configs = list(configs)
    host = configs[0].host
    edges = frozenset().union(*(c.edges for c in configs))
    return validate(edges, host, any(c.open_ends for c in configs))
