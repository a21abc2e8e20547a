import json

import numpy as np
import pytest

from fuchsian_coding import dynamics as dy
from fuchsian_coding import oracle as orc
from fuchsian_coding.scheme import CATALOG, load_catalog
from conftest import FREE, OCTAGON, TRIANGLE


@pytest.fixture(scope="module")
def oct_s5(octagon_coding):
    return dy.MarkovSystem(dy.load_catalog_action("octagon-s5"), octagon_coding)


@pytest.fixture(scope="module")
def parity(free_coding):
    return dy.MarkovSystem(dy.load_catalog_action("free-parity"), free_coding)


@pytest.mark.parametrize("name", CATALOG)
def test_trivial_action_valid(name):
    a = dy.trivial_action(load_catalog(name))
    assert a.size == 1


@pytest.mark.parametrize("name", dy.ACTIONS[1:])
def test_catalog_actions_valid(name):
    a = dy.load_catalog_action(name)
    assert np.array_equal(np.sort(a.generator_permutations[a.scheme.labels[0]]), np.arange(a.size))


def test_free_arbitrary_permutations(free):
    rng = np.random.default_rng(0)
    spec = {"points": 5, "permutations": {"a": rng.permutation(5).tolist(), "b": rng.permutation(5).tolist()}}
    a = dy.load_action(free, spec)
    assert np.array_equal(a.generator_permutations["A"][a.generator_permutations["a"]], np.arange(5))


def test_octagon_mutant_rejected(octagon):
    spec = json.loads(json.dumps(dy.load_catalog_action("octagon-s5").to_dict()))
    dy.load_action(octagon, spec)
    perm = spec["permutations"]["a"]
    perm[0], perm[1] = perm[1], perm[0]
    spec["permutations"] = {k: v for k, v in spec["permutations"].items() if k in "abcd"}
    with pytest.raises(dy.ActionError, match="relator"):
        dy.load_action(octagon, spec)


def test_bad_tables_rejected(free, octagon, triangle):
    with pytest.raises(dy.ActionError, match="bijective"):
        dy.load_action(free, {"points": 3, "permutations": {"a": [0, 0, 1], "b": [0, 1, 2]}})
    with pytest.raises(dy.ActionError, match="weights"):
        dy.load_action(free, {"points": 2, "weights": [0.3, 0.7], "permutations": {"a": "(0 1)", "b": "()"}})
    with pytest.raises(dy.ActionError, match="involution"):
        dy.load_action(triangle, {"points": 3, "permutations": {"g": "(0 1 2)", "t": "()"}})
    with pytest.raises(dy.ActionError, match="inverse"):
        dy.load_action(free, {"points": 3, "permutations": {"a": "(0 1 2)", "A": "(0 1 2)", "b": "()"}})


def test_cycle_notation(free):
    a = dy.load_action(free, {"points": ["x", "y", "z"], "permutations": {"a": "(x y z)", "b": "(x z)"}})
    assert a.generator_permutations["a"].tolist() == [1, 2, 0]
    assert a.generator_permutations["b"].tolist() == [2, 1, 0]


def test_word_permutation_composes_left_to_right(free):
    a = dy.load_action(free, {"points": 3, "permutations": {"a": "(0 1 2)", "b": "(0 1)"}})
    ab = a.word_permutation(("a", "b"))
    pa, pb = a.generator_permutations["a"], a.generator_permutations["b"]
    assert ab.tolist() == [pa[pb[x]] for x in range(3)]


def test_operators_fix_constants_and_positivity(oct_s5):
    rng = np.random.default_rng(1)
    one = np.ones(oct_s5.shape)
    for op in (dy.apply_P, dy.apply_U, dy.apply_Pstar):
        assert np.allclose(op(oct_s5, one), 1, atol=1e-12)
        assert (op(oct_s5, oct_s5.random_field(rng, nonnegative=True)) >= 0).all()


def test_u_squared_is_identity(oct_s5):
    rng = np.random.default_rng(2)
    f = oct_s5.random_field(rng)
    assert np.array_equal(dy.apply_U(oct_s5, dy.apply_U(oct_s5, f)), f)


def test_pstar_is_adjoint_of_p(oct_s5):
    rng = np.random.default_rng(3)
    for _ in range(5):
        f, g = oct_s5.random_field(rng), oct_s5.random_field(rng)
        assert oct_s5.inner(dy.apply_P(oct_s5, f), g) == pytest.approx(
            oct_s5.inner(f, dy.apply_Pstar(oct_s5, g)), abs=1e-12)


def test_matrix_free_matches_dense(oct_s5):
    rng = np.random.default_rng(4)
    f = oct_s5.random_field(rng)
    for op, mat in ((dy.apply_P, oct_s5.dense_P()), (dy.apply_U, oct_s5.dense_U()),
                    (dy.apply_Pstar, oct_s5.dense_Pstar())):
        assert np.abs(op(oct_s5, f).ravel() - mat @ f.ravel()).max() <= 1e-13


@pytest.mark.parametrize("name", ["free-parity", "free-s5", "octagon-z5", "octagon-s5",
                                  "triangle-p1f5", "triangle-z3"])
def test_adjoint_identities(name):
    r = dy.check_adjoint_identities(dy.MarkovSystem(dy.load_catalog_action(name)))
    assert r.ok, r.to_text()


def test_transposed_iota_fails(octagon_coding):
    a = dy.load_catalog_action("octagon-s5")
    iota = list(octagon_coding.involution)
    iota[0], iota[1] = iota[1], iota[0]
    r = dy.check_adjoint_identities(dy.MarkovSystem(a, octagon_coding, iota=iota))
    assert not r.ok


def test_dense_cap(octagon_coding, octagon):
    big = dy.load_action(octagon, {"points": 101, "permutations": {e: "()" for e in "abcd"}})
    m = dy.MarkovSystem(big, octagon_coding)
    with pytest.raises(dy.ActionError, match="capped"):
        m.dense_P()
    assert dy.apply_P(m, np.ones(m.shape)).shape == m.shape


def test_spherical_sum_n1_is_generator_sum(oct_s5):
    a = oct_s5.action
    f = np.arange(5.0) ** 2
    want = sum(f[a.generator_permutations[e]] for e in a.scheme.labels)
    assert np.allclose(dy.spherical_sum_coded(oct_s5, f, 1), want, atol=1e-12)


def test_spherical_sum_of_one_is_sphere_size(oct_s5):
    for n in range(1, 7):
        got = dy.spherical_sum_coded(oct_s5, np.ones(5), n)
        assert np.allclose(got, oct_s5.coding.path_count(n), rtol=1e-12)


def test_spherical_sum_octagon_matches_bruteforce(oct_s5, oct_ball):
    rng = np.random.default_rng(5)
    f = rng.integers(-5, 6, 5).astype(float)
    for n in range(1, 6):
        coded = dy.spherical_sum_coded(oct_s5, f, n)
        brute = dy.spherical_sum_bruteforce(oct_s5.action, f, n, oct_ball)
        assert np.abs(coded - brute).max() <= 1e-8
        assert np.array_equal(np.rint(coded), brute)


def test_spherical_sum_free(free_coding, free_real):
    a = dy.load_catalog_action("free-s5")
    m = dy.MarkovSystem(a, free_coding)
    ball = orc.cayley_ball(free_real, 8)
    f = np.random.default_rng(6).random(5)
    for n in range(1, 9):
        assert np.abs(dy.spherical_sum_coded(m, f, n) - dy.spherical_sum_bruteforce(a, f, n, ball)).max() <= 1e-8


def test_conditional_expectation(parity, oct_s5, free):
    f = np.array([2.0, -1.0])
    assert np.array_equal(dy.conditional_expectation(parity, f), f)
    g = np.arange(5.0)
    assert np.allclose(dy.conditional_expectation(oct_s5, g), 2.0)
    one = dy.trivial_action(free)
    assert dy.conditional_expectation(one, np.array([7.0])).tolist() == [7.0]


def test_invariant_dimensions(parity, oct_s5, free_coding, free):
    triv = dy.MarkovSystem(dy.trivial_action(free), free_coding)
    assert dy.invariant_field_dimension(triv, "Q", 1) == 1
    assert dy.invariant_field_dimension(parity, "Q", 1) == 2
    for n in (1, 2, 3):
        assert dy.invariant_field_dimension(oct_s5, "Q", n) == 1


def test_convergence_parity_is_exact(parity):
    f = np.array([0.3, 0.9])
    rows = dy.convergence_experiment(parity, f, 4)
    assert all(r.sup_error <= 1e-12 and r.l1_error <= 1e-12 for r in rows)
    assert [r.sphere_size for r in rows] == [12, 108, 972, 8748]


def test_convergence_of_invariant_function_is_zero(oct_s5):
    rows = dy.convergence_experiment(oct_s5, np.full(5, 0.25), 3)
    assert all(r.sup_error <= 1e-12 for r in rows)


def test_convergence_octagon(oct_s5):
    f = np.random.default_rng(0).random(5)
    f -= f.mean()
    rows = dy.convergence_experiment(oct_s5, f, 5)
    errs = [r.sup_error for r in rows]
    rho = dy.second_eigenvalue_modulus(oct_s5)
    n = dy.predicted_radius_index(rho, errs[0])
    assert 0 < rho < 1
    assert all(e < 1e-2 for e in errs[n - 1:])
    assert errs[-1] < errs[0]


def test_convergence_csv(parity):
    text = dy.convergence_csv(dy.convergence_experiment(parity, np.array([1.0, 0.0]), 2))
    assert text.splitlines()[0] == "n,sup_error,l1_error,sphere_size"
    assert len(text.splitlines()) == 3
