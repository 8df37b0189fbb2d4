import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopperc.arms import (ArcDecomposition, ArmError, ArmGeometry, PijTable, arc_split,
                           arcs_from_sizes, arm_event, arm_event_batch, bernoulli_sampler,
                           catalan_check, catalan_sweep, constant_sampler, crossing_components,
                           estimate_pij, iterated_split, random_arcs)
from loopperc.percolation import SiteConfig, bernoulli_sites
from loopperc.planar import cut_set, triangular_ball


def setup(R=5, n=2):
    g = triangular_ball(R)
    cut = cut_set(g, (0, 0), n)
    outer = frozenset(g.outer_walk())
    return g, cut, outer


def angle(v):
    k, l = v
    return math.atan2(l * math.sqrt(3) / 2, k + l / 2) % (2 * math.pi)


def sectors(g, m):
    """Site config open on even-numbered sectors out of ``m`` equal cones."""
    bits = [1 if v == (0, 0) else 1 - int(angle(v) / (2 * math.pi / m)) % 2 for v in g.vertices]
    return SiteConfig(g, bits)


def straddling_arcs(cut, m):
    """Arcs that each contain the end of one sector and the start of the next."""
    width = 2 * math.pi / m
    S = cut.S
    sec = [int(((angle(v) + width / 2) % (2 * math.pi)) / width) for v in S]
    # split where the shifted sector index changes
    ends = sorted(i + 1 for i in range(len(S)) if sec[i] != sec[(i + 1) % len(S)])
    return ArcDecomposition(tuple(S), tuple(ends))


def test_estimate_pij_constant_samplers():
    g, cut, outer = setup()
    t = estimate_pij(constant_sampler(1), g, cut, outer, 10, seed=1)
    assert np.all(t.row() == 0) and t.p(3, 5) == 0
    t = estimate_pij(constant_sampler(0), g, cut, outer, 10, seed=1)
    assert np.all(t.row() == 1) and t.p(3, 5) == 1


def test_estimate_pij_single_vertex_lower_bound():
    g, cut, outer = setup(R=6, n=2)
    t = estimate_pij(bernoulli_sampler(0.5), g, cut, outer, 4000, seed=2)
    for i in range(1, t.L + 1):
        assert t.p(i, i) >= 0.5 - 2 * t.se(i, i)


def test_pij_row_non_increasing():
    g, cut, outer = setup()
    t = estimate_pij(bernoulli_sampler(0.6), g, cut, outer, 2000, seed=3)
    assert np.all(np.diff(t.row()) <= 0)
    assert set(json_keys(t)) >= {"row", "se", "N"}


def json_keys(t):
    import json
    return json.loads(t.to_json()).keys()


def test_arc_split_examples():
    assert arc_split([0.9, 0.5, 0.05], 0.02) == 3
    assert arc_split([0.01], 0.02) == 1
    with pytest.raises(ArmError, match="too weak"):
        arc_split([0.9, 0.9], 0.02)
    with pytest.raises(ValueError):
        arc_split([0.1, 0.5, 0.001], 0.02)


def test_iterated_split_examples():
    vals = {(1, 1): 0.001, (2, 2): 0.001, (1, 2): 1e-5}
    dec = iterated_split(PijTable.explicit(2, vals), 0.1, 1)
    assert dec.indices == (1, 2)
    g, cut, outer = setup()
    t = estimate_pij(constant_sampler(1), g, cut, outer, 5, seed=1)
    for k in (1, 2, 3):
        assert iterated_split(t, 0.1, k).indices == tuple(range(1, 2 * k + 1))
    t = estimate_pij(constant_sampler(0), g, cut, outer, 5, seed=1)
    with pytest.raises(ArmError):
        iterated_split(t, 0.1, 1)


def test_iterated_split_exhaustion():
    # singletons too weak, whole ring strong enough
    L = 4
    tab = PijTable.explicit(L, lambda i, j: 1e-9 if (i, j) == (1, L) else 0.5)
    with pytest.raises(ArmError, match="insufficient"):
        iterated_split(tab, 0.1, 1)


@given(st.integers(0, 2**32), st.integers(1, 3))
def test_iterated_split_postcondition(seed, k):
    rng = np.random.default_rng(seed)
    L = 12
    # random monotone table: a prefix range is weaker than any of its parts
    q = rng.uniform(0, 0.05, L)

    def val(i, j):
        cols = range(i - 1, j) if i <= j else list(range(i - 1, L)) + list(range(j))
        return float(np.prod([q[c] for c in cols]))

    tab = PijTable.explicit(L, val)
    try:
        dec = iterated_split(tab, 0.5, k)
    except ArmError:
        return
    for i, j in dec.arc_ranges():
        assert tab.p(i, j) <= 0.5 / (4 * k)


def test_arc_decomposition_partitions_s():
    g, cut, outer = setup()
    rng = np.random.default_rng(0)
    for k in (1, 2, 3):
        a = random_arcs(cut.S, k, rng)
        arcs = a.arcs()
        assert len(arcs) == 2 * k and min(len(x) for x in arcs) >= 2
        flat = [v for x in arcs for v in x]
        assert sorted(flat) == sorted(cut.S)
    with pytest.raises(ValueError):
        ArcDecomposition(tuple(cut.S), (3, 2))
    assert arcs_from_sizes(cut.S, [6, 6]).indices == (6, 12)


def test_arm_event_examples():
    g, cut, outer = setup(R=6, n=2)
    arcs = arcs_from_sizes(cut.S, [6, 6])
    assert not arm_event(SiteConfig(g, np.ones(len(g.vertices))), cut, arcs, outer)
    for m in (2, 4, 6):
        sigma = sectors(g, m)
        arcs = straddling_arcs(cut, m)
        assert arcs.k == m // 2
        assert arm_event(sigma, cut, arcs, outer)


@given(st.integers(0, 2**32))
def test_arm_event_complement_symmetric(seed):
    g, cut, outer = setup()
    rng = np.random.default_rng(seed)
    geo = ArmGeometry(g, cut, outer)
    bits = (rng.random((64, len(g.vertices))) < 0.5).astype(np.uint8)
    arcs = random_arcs(cut.S, 1 + seed % 2, rng)
    assert np.array_equal(arm_event_batch(geo, bits, arcs), arm_event_batch(geo, 1 - bits, arcs))


def test_crossing_components_examples():
    g, cut, outer = setup()
    ones = SiteConfig(g, np.ones(len(g.vertices)))
    assert crossing_components(ones, cut.S, outer, 1) == 1
    assert crossing_components(ones, cut.S, outer, 0) == 0
    cut1 = cut_set(g, (0, 0), 1)
    rays = [(1, 0), (-1, 1), (0, -1)]
    strips = {(d[0] * t, d[1] * t) for d in rays for t in range(1, 6)}
    assert crossing_components(SiteConfig.from_open(g, strips), cut1.S, outer, 1) == 3
    with pytest.raises(ValueError):
        crossing_components(ones, cut.S, set(cut.S), 1)


@given(st.integers(0, 2**32))
def test_closing_vertex_changes_count_by_degree(seed):
    g, cut, outer = setup()
    rng = np.random.default_rng(seed)
    cfg = bernoulli_sites(g, 0.55, rng)
    v = g.vertices[int(rng.integers(len(g.vertices)))]
    bits = cfg.bits.copy()
    bits[g.index[v]] = 0
    before = crossing_components(cfg, cut.S, outer, 1)
    after = crossing_components(SiteConfig(g, bits), cut.S, outer, 1)
    assert abs(after - before) <= max(g.degree(v) - 1, 1)


def test_catalan_examples():
    g, cut, outer = setup(R=6, n=2)
    for m, k in ((2, 1), (6, 3)):
        sigma = sectors(g, m)
        arcs = straddling_arcs(cut, m)
        assert catalan_check(sigma, sigma, cut, arcs, outer)
        assert crossing_components(sigma, cut.S, outer, 1) + \
            crossing_components(sigma, cut.S, outer, 0) >= k + 1


def test_catalan_hypothesis_errors():
    g, cut, outer = setup()
    arcs = arcs_from_sizes(cut.S, [6, 6])
    ones = SiteConfig(g, np.ones(len(g.vertices)))
    zeros = SiteConfig(g, np.zeros(len(g.vertices)))
    with pytest.raises(ArmError, match="hypothesis"):
        catalan_check(ones, zeros, cut, arcs, outer)
    with pytest.raises(ArmError, match="hypothesis"):
        catalan_check(zeros, ones, cut, arcs, outer)


@pytest.mark.parametrize("R,n,k,p", [(3, 1, 1, 0.4), (4, 2, 2, 0.45), (4, 2, 3, 0.5)])
def test_catalan_sweep_no_violations(R, n, k, p):
    g, cut, outer = setup(R, n)
    rows, tried = catalan_sweep(g, cut, outer, k, p, 300, seed=R * 10 + k, batch=2048)
    assert len(rows) == 300
    assert all(r[2] for r in rows)
    assert min(r[3] + r[4] for r in rows) >= k + 1
