import json

import pytest
from hypothesis import given, strategies as st

from loopperc.planar import (DIRECTIONS, DOWN, UP, Domain, HexPatch, annulus, ball_faces,
                             build_hex_patch, combinatorial_ball, cut_set, domain_ball,
                             edge_endpoints, euler_characteristic, face_corners, face_edges,
                             loop_edges, surrounds, trace_faces, triangle_faces,
                             triangular_ball, triangular_graph)
from loopperc.planar.graph import PlanarGraph


def test_hex_patch_counts():
    p0 = build_hex_patch(0)
    assert (len(p0.faces), len(p0.vertex_list), p0.n_edges) == (1, 6, 6)
    p1 = build_hex_patch(1)
    assert p1.faces == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    assert (1, -1) not in p1.faces and (-1, 1) not in p1.faces


@pytest.mark.parametrize("r", range(0, 6))
def test_hex_patch_euler(r):
    p = build_hex_patch(r)
    g = p.graph
    # hexagons plus the outer face
    assert len(g.vertices) - len(g.edges) + len(p.faces) + 1 == 2
    assert len(g.faces()) == len(p.faces) + 1
    assert euler_characteristic(g) == 2


@pytest.mark.parametrize("r", range(0, 6))
def test_hex_patch_structure(r):
    p = build_hex_patch(r)
    assert max(p.degree(v) for v in p.vertex_list) <= 3
    for a, b in p.endpoints:
        assert {a[2], b[2]} == {UP, DOWN}
    # every up vertex of the patch is the centre of an up triangle touching a patch face
    ups = {v for f in p.faces for v in face_corners(f) if v[2] == UP}
    assert set(p.up_vertices) == ups
    assert HexPatch.from_json(p.to_json()).faces == p.faces
    assert json.loads(p.to_json())["faces"][0] == list(p.face_list[0])


def test_annulus():
    a1 = annulus(1)
    assert not a1 & ball_faces(1)
    assert len(a1) == len(ball_faces(2)) - len(ball_faces(1))
    with pytest.raises(ValueError):
        annulus(0)


@given(st.integers(1, 6))
def test_annulus_disjoint(r):
    assert not annulus(r) & ball_faces(r)
    assert annulus(r) | ball_faces(r) == ball_faces(2 * r)


def test_trace_faces_small():
    cyc = PlanarGraph(range(6), [(i, (i + 1) % 6) for i in range(6)],
                      rotation={i: [(i + 1) % 6, (i - 1) % 6] for i in range(6)})
    assert len(trace_faces(cyc)) == 2
    k4_pos = {0: (0, 0), 1: (6, 0), 2: (3, 6), 3: (3, 2)}
    k4 = PlanarGraph(range(4), [(a, b) for a in range(4) for b in range(a + 1, 4)],
                     positions=k4_pos)
    assert len(trace_faces(k4)) == 4
    edge = PlanarGraph([0, 1], [(0, 1)], rotation={0: [1], 1: [0]})
    faces = trace_faces(edge)
    assert len(faces) == 1 and len(faces[0]) == 2


def test_trace_faces_bad_rotation():
    with pytest.raises(ValueError):
        PlanarGraph([0, 1, 2], [(0, 1), (1, 2)], rotation={0: [1], 1: [0], 2: [1]})


@given(st.integers(0, 4))
def test_triangular_euler(R):
    g = triangular_ball(R)
    assert euler_characteristic(g) == 2


def test_combinatorial_ball():
    g = triangular_ball(3)
    assert combinatorial_ball(g, (0, 0), 0) == ({(0, 0)}, {(0, 0)})
    ball, shell = combinatorial_ball(g, (0, 0), 1)
    assert len(ball) == 7 and len(shell) == 6
    ball, shell = combinatorial_ball(g, (0, 0), 10)
    assert ball == set(g.vertices) and shell == set()


def test_cut_set_convex():
    g = triangular_ball(5)
    for n in range(1, 5):
        c = cut_set(g, (0, 0), n)
        assert set(c.S) == c.shell
        assert len(c.S) == 6 * n
        assert c.S[0] == min(c.S)


def test_cut_set_nested():
    g = triangular_ball(6)
    cuts = [cut_set(g, (0, 0), n) for n in range(0, 6)]
    for a, b in zip(cuts, cuts[1:]):
        assert a.omega <= b.omega
        assert not set(a.S) & set(b.S)
    for c in cuts:
        assert len(set(c.S)) == len(c.S)
        assert set(c.S) <= c.shell


def _pocket_graph():
    # a two-vertex spur hanging into the triangle (0,0), (1,0), (0,1)
    t = triangular_ball(4)
    pos = dict(t.positions)
    pos["p"], pos["q"] = (3, 1), (3, 2)
    return PlanarGraph(list(t.vertices) + ["p", "q"], list(t.edges) + [((1, 0), "p"), ("p", "q")],
                       positions=pos)


def test_cut_set_pocket():
    g = _pocket_graph()
    c = cut_set(g, (0, 0), 2)
    # p is at distance 2 but hidden inside a bounded face of the ball
    assert "p" in c.shell and "p" not in c.S
    assert "q" in c.omega and "q" not in c.exterior
    assert len(c.S) == 12


def test_cut_set_too_small():
    with pytest.raises(ValueError, match="patch too small"):
        cut_set(triangular_ball(2), (0, 0), 2)


def test_surrounds_examples():
    hexagon = face_corners((0, 0))
    assert surrounds(hexagon, (0, 0))
    assert not surrounds(face_corners((3, 0)), (0, 0))
    d = domain_ball(1)
    assert surrounds(d.boundary_cycle, (0, 0))
    with pytest.raises(ValueError):
        surrounds(hexagon[:3] + hexagon[:1], (0, 0))


@given(st.integers(0, 3), st.integers(-4, 4), st.integers(-4, 4))
def test_surrounds_direction_invariant(r, k, l):
    cyc = domain_ball(r).boundary_cycle
    answers = {surrounds(cyc, (k, l), d) for d in range(6)}
    assert len(answers) == 1
    assert answers.pop() == ((k, l) in ball_faces(r))


def test_loop_edges_hexagon():
    assert set(loop_edges(face_corners((2, 1)))) == set(face_edges((2, 1)))


@given(st.integers(-5, 5), st.integers(-5, 5), st.sampled_from([UP, DOWN]))
def test_vertex_triangle_consistency(k, l, kind):
    v = (k, l, kind)
    for f in triangle_faces(v):
        assert v in face_corners(f)


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 5))
def test_edge_endpoints_shared(k, l, i):
    f = (k, l)
    g = (k + DIRECTIONS[i][0], l + DIRECTIONS[i][1])
    e = face_edges(f)[i]
    a, b = edge_endpoints(e)
    assert a[2] == UP and b[2] == DOWN
    for v in (a, b):
        assert f in triangle_faces(v) and g in triangle_faces(v)


def test_domain_checks():
    host = HexPatch.ball(3)
    with pytest.raises(ValueError):
        Domain(host, {(0, 0), (2, 0)})           # disconnected
    ring = ball_faces(2) - {(0, 0)}
    with pytest.raises(ValueError):
        Domain(host, ring)                        # not simply connected
    d = Domain(host, ball_faces(1))
    assert d.boundary_cycle[0] == min(d.boundary_cycle)
    assert len(d.boundary_cycle) == len(set(d.boundary_cycle))


def test_up_graph_is_triangular():
    p = build_hex_patch(3)
    g = p.up_graph
    assert euler_characteristic(g) == 2
    assert max(g.degree(v) for v in g.vertices) <= 6


def test_triangular_graph_degree():
    g = triangular_graph([(k, l) for k in range(-3, 4) for l in range(-3, 4)])
    assert g.degree((0, 0)) == 6
