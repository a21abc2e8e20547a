import numpy as np
import pytest

from fuchsian_coding import oracle as orc
from fuchsian_coding import walker as wk
from conftest import FREE, OCTAGON, TRIANGLE


def test_free_generators(free_real):
    g = free_real.generator_matrices
    assert np.array_equal(g["a"], [[1, 2], [0, 1]])
    assert np.array_equal(g["b"], [[1, 0], [2, 1]])
    assert np.array_equal(g["a"] @ g["A"], np.eye(2))


def test_free_ball_sizes(free_real):
    ball = orc.cayley_ball(free_real, 3)
    assert ball.sphere_sizes() == [1, 4, 12, 36]
    assert np.cumsum(ball.sphere_sizes()).tolist() == [1, 5, 17, 53]
    assert orc.cayley_ball(free_real, 0).sphere_sizes() == [1]


def test_free_spheres_to_12(free_real):
    ball = orc.cayley_ball(free_real, 12)
    assert ball.sphere_sizes()[1:] == [4 * 3 ** (n - 1) for n in range(1, 13)]


def test_octagon_relators(oct_real):
    assert oct_real.relator_audit() < 1e-9


def test_octagon_small_spheres(oct_ball):
    assert oct_ball.sphere_sizes()[:3] == [1, 8, 56]


def test_triangle_has_no_realization():
    with pytest.raises(orc.OracleError):
        orc.realize_group(TRIANGLE)


def test_radius_cap(oct_real):
    with pytest.raises(orc.OracleError):
        orc.cayley_ball(oct_real, orc.MAX_RADIUS[OCTAGON] + 1)


def test_half_relators_agree(octagon, oct_real, oct_ball):
    rel = octagon.vertex_relator(0)
    first = rel[:4]
    second = tuple(octagon.inv(e) for e in reversed(rel[4:]))
    assert orc.same_element(oct_real, first, second)
    assert orc.distance(oct_ball, first) == 4
    assert orc.distance(oct_ball, ()) == 0


def test_distance_symmetric_under_inversion(octagon, oct_ball):
    for i in oct_ball.sphere_indices(4):
        w = oct_ball.word(i)
        assert orc.distance(oct_ball, wk.inverse_word(octagon, w)) == 4


def test_bfs_triangle_property(octagon, oct_real):
    ball = orc.cayley_ball(oct_real, 3)
    for i in range(len(ball)):
        w = ball.word(i)
        d = int(ball.distance[i])
        for e in octagon.labels:
            key = oct_real.key(w + (e,))
            if d < 3:
                assert abs(ball.dist_of_key(key) - d) <= 1


def test_separation(oct_ball, free_real):
    sep = orc.separation_audit(oct_ball)
    assert sep > 2 * 1e-4
    assert sep == pytest.approx(3.0571, abs=1e-3)
    assert orc.separation_audit(orc.cayley_ball(free_real, 4)) == pytest.approx(1.7627, abs=1e-3)


def test_identification_stable_when_radius_halved():
    a = orc.realize_group(OCTAGON)
    b = orc.realize_group(OCTAGON)
    b.identification_radius = a.identification_radius / 2
    ba, bb = orc.cayley_ball(a, 4), orc.cayley_ball(b, 4)
    assert ba.sphere_sizes() == bb.sphere_sizes()
    assert [ba.word(i) for i in range(len(ba))] == [bb.word(i) for i in range(len(bb))]


def test_octagon_adjacency_matches_geometry(octagon, oct_real):
    # steps e1, e2 cross the sides with interior labels e1^{-1}, e2^{-1}
    side = {sd.label: sd for sd in oct_real.sides}
    for e1 in octagon.labels:
        for e2 in octagon.labels:
            s1, s2 = side[octagon.inv(e1)], side[octagon.inv(e2)]
            touch = min(abs(p - q) for p in (s1.start, s1.end) for q in (s2.start, s2.end)) < 1e-9
            assert octagon.adjacent(e1, e2) == (e1 == e2 or touch)


def test_brute_thickened_free_is_geodesic(free, free_real):
    ball = orc.cayley_ball(free_real, 5)
    tp = orc.brute_thickened(free_real, ball, (), tuple("abAAb"))
    assert all(len(lv) == 1 for lv in tp.levels)
    assert tp.N == 5


def test_brute_thickened_degenerate(oct_real, oct_ball):
    tp = orc.brute_thickened(oct_real, oct_ball, (), ())
    assert tp.N == 0 and len(tp.levels) == 1


def test_brute_thickened_across_relator(octagon, oct_real, oct_ball):
    half = octagon.vertex_relator(0)[:4]
    tp = orc.brute_thickened(oct_real, oct_ball, (), half)
    assert [len(lv) for lv in tp.levels] == [1, 2, 2, 2, 1]


def test_shortest_paths_across_relator(octagon, oct_real, oct_ball):
    half = octagon.vertex_relator(0)[:4]
    assert len(orc.shortest_paths(oct_real, oct_ball, half)) == 2


def test_cross_section_inside_one_domain(oct_real):
    doms = orc.geodesic_cross_section(oct_real, 0.01 + 0.02j, -0.03 + 0.01j)
    assert [d.word for d in doms] == [()]


def test_free_cross_sections_are_geodesic(free, free_real):
    rng = np.random.default_rng(5)
    ball = orc.cayley_ball(free_real, 10)
    tess = wk.Tessellation(free, free_real.key)
    done = 0
    for _ in range(40):
        a, b = (0.97 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        doms = orc.geodesic_cross_section(free_real, a, b, rng)
        last = doms[-1].word
        try:
            dist = ball.dist_of_key(free_real.key(wk.inverse_word(free, doms[0].word) + last))
        except orc.OracleError:
            continue
        assert dist == len(doms) - 1
        assert wk.is_locally_shortest(doms, tess)
        done += 1
    assert done >= 20


def test_octagon_cross_sections_locally_shortest(octagon, oct_real):
    rng = np.random.default_rng(11)
    tess = wk.Tessellation(octagon, oct_real.key)
    for _ in range(40):
        a, b = (0.995 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        doms = orc.geodesic_cross_section(oct_real, a, b, rng)
        cert = wk.is_locally_shortest(doms, tess)
        assert cert, cert.reason
