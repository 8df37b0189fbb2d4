import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopperc.percolation import (ExactMeasure, Partition, SiteConfig, SpanningForest,
                                  all_spanning_trees, bernoulli_batch, bernoulli_law,
                                  bernoulli_sites, check_dominated_by_complement,
                                  check_positive_association, clusters, divide_and_color,
                                  divide_and_color_law, increasing_events, is_increasing,
                                  monotone_coupling, site_law_from_samples,
                                  spanning_tree_count, trifurcation_bound_check, trifurcations,
                                  vertex_boundary, wilson_ust)
from loopperc.percolation.kernels import batch_connects, crossing_count
from loopperc.planar import triangular_ball, triangular_graph
from loopperc.planar.graph import Graph
from loopperc.stats import total_variation


def path(n):
    return Graph(range(n), [(i, i + 1) for i in range(n - 1)])


def test_bernoulli_extremes():
    g = triangular_ball(3)
    assert bernoulli_sites(g, 0.0, 1).bits.sum() == 0
    assert bernoulli_sites(g, 1.0, 1).bits.sum() == len(g.vertices)
    with pytest.raises(ValueError):
        bernoulli_sites(g, 1.5, 1)


def test_bernoulli_half_fraction():
    g = Graph(range(10**5), [])
    frac = bernoulli_sites(g, 0.5, 11).bits.mean()
    assert abs(frac - 0.5) < 0.01


def test_bernoulli_reproducible():
    a = bernoulli_batch(50, 0.3, 20, seed=5)
    b = bernoulli_batch(50, 0.3, 20, seed=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, bernoulli_batch(50, 0.3, 20, seed=6))


def test_clusters_examples():
    g = triangular_ball(2)
    labels, sizes = clusters(SiteConfig(g, np.ones(len(g.vertices))), 1)
    assert len(sizes) == 1
    labels, sizes = clusters(SiteConfig(g, np.zeros(len(g.vertices))), 1)
    assert len(sizes) == 0 and (labels == -1).all()
    p = path(3)
    labels, sizes = clusters(SiteConfig.from_open(p, [0, 2]), 1)
    assert len(sizes) == 2 and labels[0] != labels[2]


@given(st.integers(0, 2**32), st.floats(0, 1))
def test_clusters_match_reference(seed, p):
    g = triangular_ball(2)
    cfg = bernoulli_sites(g, p, seed)
    labels, _ = clusters(cfg, 1)
    # reference: breadth-first search on open vertices
    ref = {}
    for v in g.vertices:
        if cfg[v] and v not in ref:
            ref[v] = v
            stack = [v]
            while stack:
                u = stack.pop()
                for w in g.neighbors(u):
                    if cfg[w] and w not in ref:
                        ref[w] = v
                        stack.append(w)
    for a, b in itertools.combinations(ref, 2):
        same = labels[g.index[a]] == labels[g.index[b]]
        assert same == (ref[a] == ref[b])


def test_divide_and_color_examples():
    g = path(3)
    singles = divide_and_color_law(Partition.singletons(g), 0.3)
    bern = bernoulli_law(3, 0.3)
    a, b = singles.aligned(bern)
    assert total_variation(a, b) < 1e-12
    glob = divide_and_color_law(Partition.single_class(g), 0.3)
    assert glob.prob((1, 1, 1)) == pytest.approx(0.3)
    assert glob.prob((0, 0, 0)) == pytest.approx(0.7)
    two = divide_and_color_law(Partition(g, [0, 0, 1]), 0.5)
    support = [c for c, q in zip(two.configs, two.probs) if q > 0]
    assert sorted(support) == [(0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)]
    assert all(q == pytest.approx(0.25) for q in two.probs if q > 0)


@given(st.integers(0, 2**32))
def test_divide_and_color_class_constant(seed):
    g = path(5)
    P = Partition(g, [0, 1, 0, 2, 1])
    cfg = divide_and_color(P, 0.4, seed)
    for members in P.classes():
        assert len({int(cfg.bits[i]) for i in members}) == 1


def test_divide_and_color_sampler_matches_law():
    g = path(3)
    P = Partition(g, [0, 0, 1])
    rng = np.random.default_rng(2)
    samples = np.array([divide_and_color(P, 0.3, rng).bits for _ in range(20000)])
    emp = site_law_from_samples(samples)
    a, b = emp.aligned(divide_and_color_law(P, 0.3))
    assert total_variation(a, b) < 0.02


def test_monotone_coupling_examples():
    g = triangular_ball(3)
    s, t = monotone_coupling(g, 0.0, 1)
    assert s.bits.sum() == 0 and t.bits.sum() == len(g.vertices)
    s, t = monotone_coupling(g, 0.5, 1)
    assert s == t
    with pytest.raises(ValueError):
        monotone_coupling(g, 0.6, 1)


def test_monotone_coupling_many():
    g = Graph(range(10**5), [])
    s, t = monotone_coupling(g, 0.3, 3)
    assert s <= t


@given(st.floats(0, 0.5), st.integers(0, 2**32))
def test_monotone_coupling_property(p, seed):
    s, t = monotone_coupling(triangular_ball(2), p, seed)
    assert s <= t


def test_increasing_event_counts():
    assert [len(increasing_events(m)) for m in range(1, 5)] == [3, 6, 20, 168]
    with pytest.raises(ValueError):
        increasing_events(5)


def test_increasing_events_brute_force():
    for m in (1, 2, 3):
        brute = [ev for ev in itertools.product((0, 1), repeat=1 << m) if is_increasing(ev, m)]
        got = {tuple(int(x) for x in ev) for ev in increasing_events(m)}
        assert got == set(brute)


def test_positive_association_examples():
    assert check_positive_association(bernoulli_law(2, 0.5)) == pytest.approx(0.0, abs=1e-12)
    anti = ExactMeasure([(0, 0), (1, 0), (0, 1), (1, 1)], [0.1, 0.4, 0.4, 0.1])
    assert check_positive_association(anti) == pytest.approx(-0.15, abs=1e-12)
    point = ExactMeasure([(1, 0, 1)], [1.0])
    assert check_positive_association(point) == pytest.approx(0.0, abs=1e-12)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=4))
def test_harris(ps):
    assert check_positive_association(bernoulli_law(len(ps), ps)) >= -1e-12


def test_domination_examples():
    assert check_dominated_by_complement(bernoulli_law(3, 0.5)) == pytest.approx(0.0, abs=1e-12)
    assert check_dominated_by_complement(bernoulli_law(1, 0.6)) == pytest.approx(-0.2, abs=1e-12)
    assert check_dominated_by_complement(bernoulli_law(2, 0.3)) > 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_domination_threshold(m):
    for i in range(101):
        p = i / 100
        gap = check_dominated_by_complement(bernoulli_law(m, p))
        assert (gap >= -1e-12) == (p <= 0.5)


def test_exact_measure_validation_and_json():
    with pytest.raises(ValueError):
        ExactMeasure([(0,), (1,)], [0.5, 0.6])
    with pytest.raises(ValueError):
        ExactMeasure([(0,), (1,)], [1.5, -0.5])
    mu = bernoulli_law(2, 0.25)
    back = ExactMeasure.from_json(mu.to_json())
    a, b = mu.aligned(back)
    assert np.allclose(a, b)
    assert set(json.loads(mu.to_json())) == {"configs", "probs"}


def test_spanning_forest_rejects_cycle():
    g = Graph(range(3), [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ValueError):
        SpanningForest(g, frozenset([(0, 1), (1, 2), (0, 2)]))


@pytest.mark.parametrize("g,count", [
    (Graph(range(3), [(0, 1), (1, 2), (0, 2)]), 3),
    (Graph(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)]), 4),
])
def test_ust_uniform(g, count):
    assert spanning_tree_count(g) == count
    trees = all_spanning_trees(g)
    assert len(trees) == count
    rng = np.random.default_rng(9)
    N = 20000
    tally = {t: 0 for t in trees}
    for _ in range(N):
        tally[wilson_ust(g, rng).canonical()] += 1
    emp = np.array(list(tally.values())) / N
    assert total_variation(emp, np.full(count, 1 / count)) < 0.02


def test_ust_of_tree_and_errors():
    p = path(5)
    assert wilson_ust(p, 1).canonical() == frozenset((i, i + 1) for i in range(4))
    with pytest.raises(ValueError):
        wilson_ust(Graph(range(2), []), 1)


@given(st.integers(0, 3))
def test_kirchhoff_matches_brute_force(R):
    g = triangular_graph([(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)][: R + 2])
    assert spanning_tree_count(g) == len(all_spanning_trees(g))


def test_trifurcation_examples():
    p = path(5)
    f = SpanningForest(p, frozenset(p.edges))
    assert trifurcations(f, set(range(5)), {0, 4}) == set()
    star = Graph(range(4), [(0, 1), (0, 2), (0, 3)])
    f = SpanningForest(star, frozenset(star.edges))
    assert trifurcations(f, set(range(4)), {1, 2, 3}) == {0}
    # root r=0, internal a=1, b=2, leaves 3..6
    tree = Graph(range(7), [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
    f = SpanningForest(tree, frozenset(tree.edges))
    assert trifurcations(f, set(range(7)), {3, 4, 5, 6}) == {1, 2}


def test_trifurcation_bound_examples():
    p = path(4)
    f = SpanningForest(p, frozenset(p.edges))
    assert trifurcation_bound_check(f, {1, 2}, p)
    # star inside a larger graph; its leaves are exactly the boundary
    amb = Graph(range(7), [(0, 1), (0, 2), (0, 3), (1, 4), (2, 5), (3, 6)])
    star = frozenset([(0, 1), (0, 2), (0, 3)])
    K = {0, 1, 2, 3}
    assert vertex_boundary(amb, K) == {1, 2, 3}
    assert trifurcation_bound_check(SpanningForest(amb, star), K, amb)


@given(st.integers(0, 2**32))
def test_trifurcation_bound_random(seed):
    rng = np.random.default_rng(seed)
    host = triangular_ball(3)
    open_ = bernoulli_sites(host, 0.6, rng)
    labels, sizes = clusters(open_, 1)
    if not len(sizes):
        return
    c = int(np.argmax(sizes))
    K = {v for v in host.vertices if labels[host.index[v]] == c}
    sub = host.subgraph(K)
    f = wilson_ust(sub, rng)
    forest = SpanningForest(host, f.edges)
    assert trifurcation_bound_check(forest, K, host)


def test_batch_connects_and_crossing():
    g = path(5)
    indptr, indices = g.csr()
    bits = np.array([[1, 1, 1, 1, 1], [1, 1, 0, 1, 1]], dtype=np.uint8)
    allowed = np.ones(5, dtype=np.bool_)
    src = np.zeros(5, dtype=np.bool_)
    src[0] = True
    tgt = np.zeros(5, dtype=np.bool_)
    tgt[4] = True
    assert batch_connects(indptr, indices, bits, 1, allowed, src, tgt).tolist() == [True, False]
    inner = np.array([1, 0, 0, 0, 0], dtype=np.bool_)
    ok = bits[0].astype(np.bool_)
    assert crossing_count(indptr, indices, ok, inner, tgt) == 1
