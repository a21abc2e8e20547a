import itertools
import json

import numpy as np
import pytest

from fuchsian_coding import coding as cd
from fuchsian_coding.coding import A0, B, C, D, State
from fuchsian_coding.scheme import CATALOG, load_catalog


class Raw:
    """Scheme data read straight from the catalog document, without PolygonScheme helpers."""

    def __init__(self, name):
        d = load_catalog(name).to_dict()
        self.labels = [x["label"] for x in d["sides"]]
        self.inverse = {x["label"]: x["inverse"] for x in d["sides"]}
        self.N = len(self.labels)
        self.petals = [None if c is None else d["vertex_classes"][c["vertex"]]["petals"]
                       for c in d["corners"]]
        self.compact_self_paired = [x["label"] for x in d["sides"]
                                    if x["compact"] and x["label"] == x["inverse"]]

    def p(self, e):
        return self.labels.index(e)

    def vl(self, e):
        k = (self.p(e) - 1) % self.N
        return k if self.petals[k] is not None else None

    def vr(self, e):
        k = self.p(e)
        return k if self.petals[k] is not None else None

    def n(self, corner):
        return None if corner is None else self.petals[corner]

    def l(self, e):
        return None if self.vl(e) is None else self.inverse[self.labels[(self.p(e) - 1) % self.N]]


def eq(a, b):
    return a is not None and a == b


def filtered_states(name):
    r = Raw(name)
    L = r.labels
    inv = r.inverse
    top = max([x for x in r.petals if x is not None], default=2)
    g = r.compact_self_paired[0] if (r.N == 3 and len(r.compact_self_paired) == 1
                                     and sum(1 for x in load_catalog(name).sides if x.compact) == 1) else None
    out = set()
    rng = range(1, top + 1)
    for e in L:
        nl, nr = r.n(r.vl(e)), r.n(r.vr(e))
        if e != g:
            out.add(A0(e))
        for a, b in itertools.product(rng, rng):
            ex = e == g and not (a > 1 and b > 1)
            if nl and 3 <= a + b <= nl and a < nl and b < nl and not ex:
                out.add(State("AL", (e,), (a, b)))
            if nr and 3 <= a + b <= nr and a < nr and b < nr and not ex:
                out.add(State("AR", (e,), (a, b)))
            if nl and nr and 2 <= a <= nl - 1 and 2 <= b <= nr - 1:
                out.add(State("ALR", (e,), (a, b)))
            if nl and nr and 2 <= a <= nr - 1 and 2 <= b <= nl - 1:
                out.add(State("ARL", (e,), (a, b)))
    for x, y in itertools.product(L, L):
        if eq(r.vl(inv[x]), r.vr(inv[y])):
            out.add(B(x, y))
        if eq(r.vr(x), r.vl(y)):
            out.add(D(x, y))
        n = r.n(r.vr(x))
        for k in range(1, top + 1):
            if n is None or not 1 <= k <= n - 2:
                continue
            z = inv[x]
            for _ in range(2 * k + 1):
                z = r.l(z)
            if z == y:
                out.add(C(k, x, y))
    for x, y, z in itertools.product(L, L, L):
        if eq(r.vl(inv[x]), r.vr(inv[y])) and eq(r.vr(y), r.vl(z)):
            out.add(State("EL", (x, y, z)))
        if eq(r.vr(x), r.vl(y)) and eq(r.vl(inv[y]), r.vr(inv[z])):
            out.add(State("ER", (x, y, z)))
    return out


@pytest.mark.parametrize("name", CATALOG)
def test_states_match_constraint_filter(name):
    got = cd.build_states(load_catalog(name))
    assert len(got) == len(set(got))
    assert set(got) == filtered_states(name)


def test_free_states(free_coding):
    assert [str(s) for s in free_coding.states] == ["A0(a)", "A0(b)", "A0(A)", "A0(B)"]
    pi = free_coding.transition
    for i, x in enumerate("abAB"):
        for j, y in enumerate("abAB"):
            assert pi[i, j] == (y != x.swapcase())


def test_octagon_state_counts(octagon_coding):
    assert octagon_coding.counts_by_kind() == {
        "A0": 8, "AL": 40, "AR": 40, "ALR": 32, "ARL": 32, "B": 8, "C": 16, "D": 8, "EL": 8, "ER": 8}
    assert len(octagon_coding) == 200


def test_triangle_special_states(triangle_coding):
    sts = set(triangle_coding.states)
    assert State("ALR", ("g",), (2, 2)) in sts
    assert A0("g") not in sts
    assert not any(s.labels == ("g",) and s.kind in ("AL", "AR") and min(s.indices) == 1 for s in sts)
    assert len(sts) == 16


def test_canonical_order_deterministic(octagon):
    a = cd.build_coding(octagon).to_json()
    b = cd.build_coding(octagon).to_json()
    assert a == b
    d = json.loads(a)
    assert len(d["states"]) == 200 and len(d["involution"]) == 200


def test_b_to_c1_present(octagon, octagon_coding):
    s, c = octagon, octagon_coding
    for st in c.states:
        if st.kind == "B":
            eL, eR = st.labels
            tgt = C(1, s.rot_r(eL), s.rot_l(eR))
            assert c.transition[c.index[st], c.index[tgt]]


def test_c_last_fans_out_to_three(octagon, octagon_coding):
    s, c = octagon, octagon_coding
    for st in c.states:
        if st.kind == "C" and st.indices == (2,):
            succ = [c.states[j] for j in c.successors[c.index[st]]]
            assert sorted(x.kind for x in succ) == ["D", "EL", "ER"]
            eL, eR = st.labels
            assert D(s.rot_r(eL), s.rot_l(eR)) in succ


def test_involution_examples(octagon, octagon_coding):
    s = octagon
    assert cd.involution(s, A0("a")) == A0("A")
    for st in octagon_coding.states:
        if st.kind == "B":
            eL, eR = st.labels
            assert cd.involution(s, st) == D(s.inv(eR), s.inv(eL))
        if st.kind == "C" and st.indices == (1,):
            eL, eR = st.labels
            assert cd.involution(s, st) == C(4 - 2, s.inv(eR), s.inv(eL))


@pytest.mark.parametrize("name", CATALOG)
def test_reversible(name):
    c = cd.build_coding(load_catalog(name))
    assert cd.check_reversibility(c)
    iota = np.asarray(c.involution)
    assert np.array_equal(iota[iota], np.arange(len(iota)))


def test_flipped_transition_breaks_reversibility(octagon):
    c = cd.build_coding(octagon)
    pi = c.transition.copy()
    i, j = np.argwhere(pi == 0)[123]
    pi[i, j] = 1
    bad = cd.Coding(c.scheme, c.states, pi, c.start_set, c.final_set, c.involution, c.special, c.index)
    assert not cd.check_reversibility(bad)


@pytest.mark.parametrize("name", CATALOG)
def test_connected_aperiodic(name):
    c = cd.build_coding(load_catalog(name))
    assert cd.strongly_connected(c)
    assert cd.period(c) == 1
    assert cd.aperiodic(c)


def test_positivity_indices(free_coding, octagon_coding, triangle_coding):
    assert cd.positivity_index(free_coding) == 2
    assert cd.positivity_index(octagon_coding) == 8
    assert cd.positivity_index(triangle_coding) == 8
    with pytest.raises(cd.CodingError):
        cd.positivity_index(octagon_coding, cap=3)


def test_disjoint_copies_not_connected(free_coding):
    pi = free_coding.transition
    two = np.block([[pi, np.zeros_like(pi)], [np.zeros_like(pi), pi]])
    assert not cd.strongly_connected(two)


def test_path_counts(free_coding, octagon_coding, triangle_coding):
    assert [free_coding.path_count(n) for n in range(1, 8)] == [4 * 3 ** (n - 1) for n in range(1, 8)]
    assert [octagon_coding.path_count(n) for n in range(1, 7)] == [8, 56, 392, 2736, 19096, 133288]
    # n = 1 double-counts g (both special A states are start and final); see the ledger
    assert [triangle_coding.path_count(n) for n in range(1, 8)] == [4, 6, 10, 16, 26, 42, 68]


def test_paths_enumeration_matches_count(octagon_coding):
    for n in range(1, 4):
        assert len(octagon_coding.paths(n)) == octagon_coding.path_count(n)


def test_start_final_swap(octagon_coding):
    c = octagon_coding
    assert sorted(c.involution[i] for i in c.start_set) == c.final_set
