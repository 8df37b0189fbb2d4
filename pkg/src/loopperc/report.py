"""Experiment configuration and run reports for the command-line driver."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .rng import SEED_MAX

COMMANDS = ("enumerate", "sample", "rsw", "blocking", "arms", "trifurcation", "couple", "check")
STOCHASTIC = frozenset(("sample", "rsw", "blocking", "arms", "trifurcation", "check"))


@dataclass
class ExperimentConfig:
    command: str
    n: list = field(default_factory=lambda: [1.0])        # loop weights (grid)
    x: list = field(default_factory=lambda: [1.0])        # edge weights (grid)
    p: float = 0.5                                        # site density
    r: list = field(default_factory=lambda: [1])          # radii (grid)
    k: list = field(default_factory=lambda: [2])          # annulus scales or arm counts
    window: int = 0                                       # resample window radius
    host: int = 0                                         # host ball radius, 0 = automatic
    root: list = field(default_factory=lambda: [0, 0])
    eps: float = 0.1
    seed: int | None = None
    sweeps: int = 1000
    burnin: int = 1000
    samples: int = 1000
    gap: int = 10
    chains: int = 1
    workers: int = 1
    scale: float = 1.0                                    # sample-size factor for ``check``
    tolerance: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        self.n = [float(v) for v in _as_list(self.n)]
        self.x = [float(v) for v in _as_list(self.x)]
        self.r = [_int(v, "r") for v in _as_list(self.r)]
        self.k = [_int(v, "k") for v in _as_list(self.k)]
        if any(not v > 0 for v in self.n):
            raise ValueError("n must be positive")
        if any(not v > 0 for v in self.x):
            raise ValueError("x must be positive")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if any(v < 0 for v in self.r) or self.window < 0 or self.host < 0:
            raise ValueError("radii must be nonnegative")
        if any(v < 1 for v in self.k):
            raise ValueError("k must be at least 1")
        if self.seed is not None:
            self.seed = _int(self.seed, "seed")
            if not 0 <= self.seed <= SEED_MAX:
                raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ("samples", "chains", "workers", "gap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        for name in ("sweeps", "burnin"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if len(self.root) != 2:
            raise ValueError("root must be a pair of axial coordinates")
        self.root = [int(v) for v in self.root]
        for key, val in self.tolerance.items():
            if not (isinstance(val, (int, float)) and val >= 0):
                raise ValueError(f"tolerance {key!r} must be a nonnegative number")
        if self.command in STOCHASTIC and self.seed is None:
            raise ValueError(f"--seed is required for '{self.command}'")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _int(v, name) -> int:
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError(f"{name} must be an integer")
    return int(v)


def build_id() -> str:
    """Short content hash of the package sources."""
    h = hashlib.sha1()
    for path in sorted(Path(__file__).parent.rglob("*.py")):
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


ROW_FIELDS = ("name", "value", "ci_lo", "ci_hi", "n_samples", "estimator", "seed")


@dataclass
class RunReport:
    config: ExperimentConfig
    build: str = field(default_factory=build_id)
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add(self, name: str, value, estimator: str, ci=(None, None), n_samples=0,
            seed=None, **columns):
        row = {"name": name, "value": value, "ci_lo": ci[0], "ci_hi": ci[1],
               "n_samples": n_samples, "estimator": estimator,
               "seed": "" if seed is None else seed}
        row.update(columns)
        self.rows.append(row)

    def check(self, name: str, passed: bool, kind: str, **info):
        self.assertions.append({"name": name, "passed": bool(passed), "kind": kind, **info})

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def finish(self) -> "RunReport":
        self.wall_clock = time.perf_counter() - self._t0
        return self

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "build": self.build,
                "wall_clock": self.wall_clock, "rows": self.rows,
                "assertions": self.assertions, "pass": self.passed, **self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, default=_jsonable)

    def to_csv(self, header=None) -> str:
        header = list(header or _columns(self.rows))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in self.rows:
            w.writerow([fmt(row.get(c, "")) for c in header])
        return buf.getvalue()

    def write(self, path: str | None, header=None):
        """CSV rows for a ``.csv`` path (with a JSON report beside it), else JSON."""
        if path is None:
            return
        p = Path(path)
        if p.suffix == ".csv":
            p.write_text(self.to_csv(header))
            p.with_suffix(".json").write_text(self.to_json())
        else:
            p.write_text(self.to_json())


def _columns(rows) -> list:
    cols = list(ROW_FIELDS)
    for row in rows:
        cols += [c for c in row if c not in cols]
    return cols


def fmt(v) -> str:
    """Lossless decimal text: floats with 17 significant digits."""
    if isinstance(v, bool):
        return str(v).lower()
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _jsonable(v):
    if hasattr(v, "tolist"):
        return v.tolist()
    if isinstance(v, (set, frozenset)):
        return sorted(v)
    raise TypeError(f"not serialisable: {type(v).__name__}")
