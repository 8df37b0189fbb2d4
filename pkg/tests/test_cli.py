import csv
import io
import json
import math

import pytest
from hypothesis import given, strategies as st

import loopperc.loopmodel.exact as exact_mod
from loopperc import checks
from loopperc.cli import main
from loopperc.report import ExperimentConfig, RunReport, fmt

SQ = 1 / math.sqrt(2)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith(("PASS", "FAIL"))]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


# ------------------------------------------------------------ config

@given(st.lists(st.floats(0.01, 5), max_size=3), st.lists(st.floats(0.01, 2), max_size=3),
       st.floats(0, 1), st.lists(st.integers(0, 6), max_size=3), st.integers(0, 2**64 - 1),
       st.integers(1, 10**6))
def test_config_roundtrip(ns, xs, p, rs, seed, samples):
    cfg = ExperimentConfig("rsw", n=ns, x=xs, p=p, r=rs, seed=seed, samples=samples,
                           tolerance={"mcmc": 0.05})
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("bad", [{"n": [-1.0]}, {"x": [0.0]}, {"p": 1.5}, {"r": [-1]},
                                 {"seed": 2**64}, {"seed": -1}, {"samples": 0},
                                 {"tolerance": {"law": -1}}, {"bogus": 1}, {"eps": 0}])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"command": "sample", "seed": 1, **bad})


def test_seed_required_for_stochastic_commands():
    with pytest.raises(ValueError, match="seed"):
        ExperimentConfig("rsw")
    ExperimentConfig("enumerate")


def test_csv_is_lossless():
    rep = RunReport(ExperimentConfig("enumerate"))
    rep.add("v", 0.1 + 0.2, "test", (1 / 3, None))
    row = rows_of(rep.to_csv())[0]
    assert float(row["value"]) == 0.1 + 0.2 and float(row["ci_lo"]) == 1 / 3
    assert row["ci_hi"] == ""
    assert fmt(True) == "true" and fmt(7) == "7"


# ------------------------------------------------------------ commands

@pytest.mark.parametrize("n,x,expected", [(2, SQ, 0.2), (1, 1, 0.5)])
def test_enumerate_single_hexagon(capsys, n, x, expected):
    code, out, _ = run(capsys, "enumerate", "--r", 0, "--n", n, "--x", x)
    assert code == 0
    row = [r for r in rows_of(out) if r["name"] == "origin hexagon occupied"][0]
    assert float(row["value"]) == pytest.approx(expected, abs=1e-12)


def test_bad_input_exits_2(capsys):
    code, _, err = run(capsys, "enumerate", "--n", -1)
    assert code == 2 and "n must be positive" in err
    code, _, err = run(capsys, "enumerate", "--r", 3)
    assert code == 2 and "Metropolis" in err
    code, _, err = run(capsys, "sample")
    assert code == 2 and "seed" in err
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_config_file_with_flag_override(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "enumerate", "r": [0], "n": [1.0], "x": [0.5]}))
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "enumerate", "--config", path, "--x", 1.0, "--out", out_path)
    assert code == 0
    rep = json.loads(out_path.read_text())
    assert rep["config"]["x"] == [1.0] and rep["config"]["r"] == [0]
    assert rep["pass"] and len(rep["build"]) == 12
    assert rep["tables"][0]["probs"] == pytest.approx([0.5, 0.5])


def test_rsw_rows(capsys, tmp_path):
    out_path = tmp_path / "rsw.csv"
    code, out, _ = run(capsys, "rsw", "--seed", 3, "--n", 1, "--x", 1e-3, 1, "--k", 2,
                       "--samples", 20000, "--burnin", 200, "--gap", 2, "--out", out_path)
    assert code == 0
    tiny, unit = rows_of(out_path.read_text())
    assert float(tiny["value"]) == 0.0 and float(tiny["ci_hi"]) < 0.01
    assert 0 < float(unit["ci_lo"]) and float(unit["ci_hi"]) < 1
    assert unit["supported"] == "true"
    assert out_path.with_suffix(".json").exists()


def test_rsw_empty_grid(capsys, tmp_path):
    out_path = tmp_path / "e.csv"
    code, _, _ = run(capsys, "rsw", "--seed", 1, "--k", "--out", out_path)
    assert code == 0
    assert out_path.read_text() == "name,value,ci_lo,ci_hi,n_samples,estimator,seed,n,x,k,supported\n"


def test_rsw_reproducible_across_workers(capsys, tmp_path):
    texts = []
    for workers in (1, 2, 1):
        p = tmp_path / f"w{len(texts)}.csv"
        run(capsys, "rsw", "--seed", 11, "--k", 2, "--samples", 400, "--burnin", 50,
            "--gap", 2, "--chains", 4, "--workers", workers, "--out", p)
        texts.append(p.read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_blocking_unit_weights(capsys):
    code, out, _ = run(capsys, "blocking", "--seed", 1, "--n", 1, "--x", 1, "--r", 1,
                       "--samples", 100, "--burnin", 20, "--gap", 2)
    assert code == 0
    row = [r for r in rows_of(out) if r["name"] == "crossing frequency"][0]
    assert float(row["value"]) == 0.0


def test_arms(capsys):
    code, out, _ = run(capsys, "arms", "--seed", 2, "--r", 2, "--host", 3, "--k", 1,
                       "--p", 0.5, "--samples", 4000, "--eps", 0.9)
    assert code == 0 and "arm event probability" in out
    code, out, _ = run(capsys, "arms", "--seed", 2, "--r", 1, "--host", 2, "--k", 1,
                       "--p", 0.5, "--samples", 2000, "--eps", 0.9)
    assert code == 1 and "too weak" in out


def test_trifurcation_and_couple(capsys):
    code, out, _ = run(capsys, "trifurcation", "--seed", 5, "--samples", 200)
    assert code == 0 and "PASS [exact]" in out
    code, out, _ = run(capsys, "couple", "--r", 1, "--n", 1.5, "--x", 0.8)
    assert code == 0
    assert float(rows_of(out)[0]["value"]) < 1e-9


def test_couple_detects_weight_sign_bug(capsys, monkeypatch):
    orig = exact_mod.log_weight
    monkeypatch.setattr(exact_mod, "log_weight", lambda w, s: -orig(w, s))
    code, out, _ = run(capsys, "couple", "--r", 1, "--n", 2, "--x", SQ)
    assert code == 1 and "FAIL [exact]" in out
    assert not checks.law_equality().passed


def test_strict_tolerance_is_a_statistical_failure():
    res = checks.run_criterion(1, scale=0.01, tol=0.0, seed=1)
    assert not res.passed and res.kind == "statistical"


def test_check_command(capsys):
    code, out, _ = run(capsys, "check", "--seed", 1, "--scale", 0.05,
                       "--tolerance", "mcmc=0.1", "--tolerance", "duality=0.03",
                       "--tolerance", "ust=0.05")
    assert code == 0, out
    assert out.count("PASS [exact]") == 6 and out.count("PASS [statistical]") == 3
