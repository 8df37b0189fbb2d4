"""Command-line driver: ``loopperc <command> [flags]``.

Every command builds an ExperimentConfig (from ``--config`` and flags, flags
winning), runs, prints a summary and writes a report to ``--out``.  Exit
codes: 0 all assertions hold, 1 an assertion failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import checks
from .arms import (ArmError, ArmGeometry, arm_event_batch, bernoulli_sampler, estimate_pij,
                   iterated_split)
from .coupling import blocking_crossing, law_equality_report
from .loopmodel import GibbsSpec, MetropolisChain, enumerate_gibbs, rsw_estimate
from .percolation import bernoulli_batch
from .planar import ball_faces, cut_set, triangular_ball
from .report import COMMANDS, ExperimentConfig, RunReport
from .rng import child_seed
from .stats import wilson_interval


def _grid(cfg, *names):
    lists = [getattr(cfg, a) for a in names]
    out = [()]
    for vals in lists:
        out = [t + (v,) for t in out for v in vals]
    return out


def _split(total: int, parts: int) -> list[int]:
    return [total // parts + (i < total % parts) for i in range(parts)]


def _pool_map(cfg, fn, items):
    """Ordered map over worker threads; results never depend on scheduling."""
    if cfg.workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(cfg.workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- commands

def cmd_enumerate(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    tables = []
    for r, n, x in _grid(cfg, "r", "n", "x"):
        spec = GibbsSpec.ball(r, n, x)
        t = enumerate_gibbs(spec)
        hexa = frozenset(spec.host.face_edge_ids((0, 0)))
        p_hex = float(sum(p for c, p in zip(t.configs, t.probs) if hexa <= c))
        mean_edges = float(sum(p * len(c & spec.domain.edges) for c, p in zip(t.configs, t.probs)))
        cols = {"r": r, "n": n, "x": x}
        rep.add("Z", t.Z, "exact enumeration", n_samples=len(t), **cols)
        rep.add("origin hexagon occupied", p_hex, "exact enumeration", n_samples=len(t), **cols)
        rep.add("mean edges in domain", mean_edges, "exact enumeration", n_samples=len(t), **cols)
        tables.append({"r": r, "n": n, "x": x, "log_z": t.log_z,
                       "configs": [sorted(c) for c in t.configs], "probs": t.probs.tolist()})
    rep.extra["tables"] = tables
    return rep


def cmd_sample(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    for gi, (r, n, x) in enumerate(_grid(cfg, "r", "n", "x")):
        spec = GibbsSpec.ball(r, n, x)
        seed = child_seed(cfg.seed, gi)
        hexa = spec.host.face_edge_ids((0, 0))
        dom = sorted(spec.domain.edges)

        def chain_run(c, spec=spec, seed=seed, hexa=hexa, dom=dom):
            ch = MetropolisChain(spec, None, seed, c)
            ch.run(cfg.burnin)
            _, rows = ch.sample(_split(cfg.samples, cfg.chains)[c], cfg.gap, record_edges=True)
            return (int(rows[:, hexa].all(axis=1).sum()), float(rows[:, dom].sum()),
                    ch.accepted, ch.proposals)

        res = _pool_map(cfg, chain_run, range(cfg.chains))
        hits = sum(h for h, *_ in res)
        density = sum(d for _, d, *_ in res) / (cfg.samples * len(dom))
        acc = sum(a for *_, a, _ in res) / max(1, sum(p for *_, p in res))
        cols = {"r": r, "n": n, "x": x}
        p = hits / cfg.samples
        rep.add("origin hexagon occupied", p, "Metropolis frequency",
                wilson_interval(hits, cfg.samples), cfg.samples, seed, **cols)
        rep.add("edge density", density, "Metropolis mean", n_samples=cfg.samples, seed=seed,
                **cols)
        rep.add("acceptance rate", acc, "Metropolis proposals", seed=seed, **cols)
    return rep


RSW_HEADER = ("name", "value", "ci_lo", "ci_hi", "n_samples", "estimator", "seed",
              "n", "x", "k", "supported")


def cmd_rsw(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    for gi, (n, x, k) in enumerate(_grid(cfg, "n", "x", "k")):
        spec = GibbsSpec.ball(2 * k, n, x)
        seed = child_seed(cfg.seed, gi)
        sizes = _split(cfg.samples, cfg.chains)
        res = _pool_map(cfg, lambda c: rsw_estimate(spec, k, sizes[c], seed, cfg.burnin,
                                                    cfg.gap, stream=c), range(cfg.chains))
        hits = sum(round(r["estimate"] * r["samples"]) for r in res)
        rep.add("annulus loop probability", hits / cfg.samples, "Metropolis frequency",
                wilson_interval(hits, cfg.samples), cfg.samples, seed, n=n, x=x, k=k,
                supported=res[0]["supported"])
    return rep


def cmd_blocking(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    for gi, (n, x) in enumerate(_grid(cfg, "n", "x")):
        seeds = [child_seed(cfg.seed, gi, i) for i in range(len(cfg.r))]
        res = _pool_map(cfg, lambda i: blocking_crossing(cfg.r[i], n, x, cfg.samples, seeds[i],
                                                         cfg.burnin, cfg.gap),
                        range(len(cfg.r)))
        for seed, b in zip(seeds, res):
            cols = {"n": n, "x": x, "r": b["r"]}
            rep.add("crossing frequency", b["crossing"], "Metropolis + blocking sample",
                    (b["crossing"] - 2 * b["se"], b["crossing"] + 2 * b["se"]), cfg.samples,
                    seed, **cols)
            rep.add("largest cluster fraction", b["largest_fraction"], "sample mean",
                    n_samples=cfg.samples, seed=seed, **cols)
        if len(res) > 1:
            # the crossing frequency should not grow with r beyond 2 SE
            ok = all(b["crossing"] <= a["crossing"] + 2 * math.hypot(a["se"], b["se"])
                     for a, b in zip(res, res[1:]))
            rep.check(f"crossing non-increasing in r at n={n:g}, x={x:g}", ok, "statistical")
    return rep


def cmd_arms(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    decomps = []
    for gi, (r, k) in enumerate(_grid(cfg, "r", "k")):
        if r < 1:
            raise ValueError("the cut radius must be at least 1")
        R = cfg.host or 2 * r + 2
        g = triangular_ball(R)
        cut = cut_set(g, tuple(cfg.root), r)
        outer = frozenset(g.outer_walk())
        seed = child_seed(cfg.seed, gi)
        table = estimate_pij(bernoulli_sampler(cfg.p), g, cut, outer, cfg.samples, seed)
        L = table.L
        cols = {"r": r, "k": k, "R": R, "p": cfg.p}
        rep.add("one-arm failure p(1, L)", table.p(1, L), "non-connection frequency",
                (table.p(1, L) - 2 * table.se(1, L), table.p(1, L) + 2 * table.se(1, L)),
                cfg.samples, seed, **cols)
        try:
            dec = iterated_split(table, cfg.eps, k, cut.S)
        except ArmError as err:
            rep.check(f"arc decomposition r={r} k={k}", False, "statistical", message=str(err))
            continue
        rep.check(f"arc decomposition r={r} k={k}", True, "statistical")
        geo = ArmGeometry(g, cut, outer)
        bits = bernoulli_batch(len(g.vertices), cfg.p, cfg.samples, child_seed(seed, 1))
        hits = int(arm_event_batch(geo, bits, dec).sum())
        rep.add("arm event probability", hits / cfg.samples, "Bernoulli frequency",
                wilson_interval(hits, cfg.samples), cfg.samples, child_seed(seed, 1), **cols)
        decomps.append({"r": r, "k": k, "indices": list(dec.indices),
                        "table": json.loads(table.to_json())})
    rep.extra["decompositions"] = decomps
    return rep


def cmd_trifurcation(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    seed = child_seed(cfg.seed, 0)
    size = max(2, cfg.host or 50)
    res = checks.trifurcation_bound(instances=cfg.samples, seed=seed, max_size=size)
    rep.add("bound violations", res.value, "exhaustive check", n_samples=cfg.samples, seed=seed)
    rep.check("trifurcations <= boundary size", res.passed, "exact")
    return rep


def cmd_couple(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    tol = cfg.tolerance.get("law", 1e-9)
    for r, n, x in _grid(cfg, "r", "n", "x"):
        res = law_equality_report(enumerate_gibbs(GibbsSpec.ball(r, n, x)),
                                  ball_faces(cfg.window), tol)
        rep.add("push-forward TV", res["tv_exact"], "exact kernel", r=r, n=n, x=x,
                window=cfg.window)
        rep.check(f"law preserved r={r} n={n:g} x={x:g}", res["pass"], "exact",
                  tv_exact=res["tv_exact"])
    return rep


def cmd_check(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg)
    for number in checks.INVARIANTS:
        name = checks.NAMES[number]
        res = checks.run_criterion(number, cfg.scale, cfg.tolerance.get(name), cfg.seed)
        rep.add(name, res.value, res.name, seed=cfg.seed, seconds=res.seconds)
        rep.check(name, res.passed, res.kind, threshold=res.threshold)
        print(res.line(name), flush=True)
    return rep


COMMAND_FNS = {"enumerate": cmd_enumerate, "sample": cmd_sample, "rsw": cmd_rsw,
               "blocking": cmd_blocking, "arms": cmd_arms, "trifurcation": cmd_trifurcation,
               "couple": cmd_couple, "check": cmd_check}
HEADERS = {"rsw": RSW_HEADER}


# ---------------------------------------------------------------- parsing

def _tolerance(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("tolerance must look like NAME=VALUE")
    return key, float(val)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--out", default=S, help="report path (.csv for rows, else JSON)")
    common.add_argument("--seed", type=int, default=S, help="64-bit seed")
    common.add_argument("--n", type=float, nargs="*", default=S, help="loop weights")
    common.add_argument("--x", type=float, nargs="*", default=S, help="edge weights")
    common.add_argument("--p", type=float, default=S, help="site density")
    common.add_argument("--r", type=int, nargs="*", default=S, help="radii")
    common.add_argument("--k", type=int, nargs="*", default=S, help="annulus scales or arm counts")
    common.add_argument("--window", type=int, default=S, help="resample window radius")
    common.add_argument("--host", type=int, default=S, help="host radius or patch size")
    common.add_argument("--root", type=int, nargs=2, default=S, help="root face")
    common.add_argument("--eps", type=float, default=S)
    for name in ("sweeps", "burnin", "samples", "gap", "chains", "workers"):
        common.add_argument(f"--{name}", type=int, default=S)
    common.add_argument("--scale", type=float, default=S, help="sample-size factor for check")
    common.add_argument("--tolerance", type=_tolerance, action="append", default=S,
                        metavar="NAME=VALUE")
    parser = argparse.ArgumentParser(prog="loopperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"enumerate": "exact Gibbs tables on small balls",
             "sample": "Metropolis samples of the loop model",
             "rsw": "annulus-loop probability sweep",
             "blocking": "blocking-cluster crossing statistics",
             "arms": "arc decomposition and arm-event estimates",
             "trifurcation": "random checks of the trifurcation bound",
             "couple": "exact law check of the coupled resampling",
             "check": "run the invariant suite"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    d = {}
    if args.config:
        d = json.loads(Path(args.config).read_text())
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    if "tolerance" in flags:
        flags["tolerance"] = {**d.get("tolerance", {}), **dict(flags["tolerance"])}
    d.update(flags)
    return ExperimentConfig.from_dict(d)


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        rep = COMMAND_FNS[cfg.command](cfg).finish()
    except (ValueError, OSError) as err:
        print(f"loopperc {args.command}: error: {err}", file=sys.stderr)
        return 2
    print(rep.to_csv(HEADERS.get(cfg.command)), end="")
    for a in rep.assertions:
        msg = f": {a['message']}" if "message" in a else ""
        print(f"{'PASS' if a['passed'] else 'FAIL'} [{a['kind']}] {a['name']}{msg}")
    rep.write(cfg.out, HEADERS.get(cfg.command))
    return 0 if rep.passed else 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
