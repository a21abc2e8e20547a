"""States, admissible transitions, start/final sets and the time-reversing involution.

A state describes two consecutive levels of a thickened path up to the group
action.  Labels are the interior labels seen from the future domains, so for
an A-state A(e) the future domain is the past domain times e.
"""

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

KINDS = ("A0", "AL", "AR", "ALR", "ARL", "B", "C", "D", "EL", "ER")
A_KINDS = ("A0", "AL", "AR", "ALR", "ARL")


class CodingError(ValueError):
    pass


class State(NamedTuple):
    kind: str
    labels: tuple
    indices: tuple = ()

    def __str__(self):
        lab = ",".join(self.labels)
        if self.kind == "C":
            return f"C{self.indices[0]}({lab})"
        if self.kind in ("A0", "B", "D"):
            return f"{self.kind}({lab})"
        if self.kind in ("EL", "ER"):
            return f"E_{self.kind[1]}({lab})"
        sub = self.kind[1:]
        return f"A_{sub}[{self.indices[0]},{self.indices[1]}]({lab})"

    @property
    def is_a(self):
        return self.kind in A_KINDS

    def to_dict(self):
        return {"kind": self.kind, "labels": list(self.labels), "indices": list(self.indices)}


def A0(e):
    return State("A0", (e,))


def AL(i_minus, i_plus, e):
    return State("AL", (e,), (i_minus, i_plus))


def AR(i_minus, i_plus, e):
    return State("AR", (e,), (i_minus, i_plus))


def ALR(i_minus, i_plus, e):
    return State("ALR", (e,), (i_minus, i_plus))


def ARL(i_minus, i_plus, e):
    return State("ARL", (e,), (i_minus, i_plus))


def B(eL, eR):
    return State("B", (eL, eR))


def C(k, eL, eR):
    return State("C", (eL, eR), (k,))


def D(eL, eR):
    return State("D", (eL, eR))


def EL(eL, eM, eR):
    return State("EL", (eL, eM, eR))


def ER(eL, eM, eR):
    return State("ER", (eL, eM, eR))


def _same(c1, c2):
    # corners compare by position in R, not by vertex class
    return c1 is not None and c1 == c2


def _iterate(f, x, times):
    for _ in range(times):
        if x is None:
            return None
        x = f(x)
    return x


def c_petals(s, eL):
    """n(e_L, e_R) for C-type pairs: petals at the vertex v_R(e_L)."""
    return s.petals_right(eL)


def a_index_ranges(s, kind, e):
    """All admissible (i_minus, i_plus) for an A-subtype with label e."""
    nl, nr = s.petals_left(e), s.petals_right(e)
    out = []
    if kind == "AL" and nl is not None:
        out = [(a, b) for a in range(1, nl) for b in range(1, nl) if 3 <= a + b <= nl]
    elif kind == "AR" and nr is not None:
        out = [(a, b) for a in range(1, nr) for b in range(1, nr) if 3 <= a + b <= nr]
    elif kind == "ALR" and nl is not None and nr is not None:
        out = [(a, b) for a in range(2, nl) for b in range(2, nr)]
    elif kind == "ARL" and nl is not None and nr is not None:
        out = [(a, b) for a in range(2, nr) for b in range(2, nl)]
    return out


def _special_ok(kind, idx, e, g):
    """Special-case exclusions: A(g) needs some i_- > 1 and some i_+ > 1."""
    if e != g:
        return True
    if kind == "A0":
        return False
    if kind in ("AL", "AR"):
        return idx[0] > 1 and idx[1] > 1
    return True


def build_states(s, special=None):
    """All states of the scheme in canonical order."""
    if special is None:
        special = s.special_label()
    labels = s.labels
    inv, rot_l = s.inv, s.rot_l
    out = []
    for kind in ("A0", "AL", "AR", "ALR", "ARL"):
        for e in labels:
            idxs = [()] if kind == "A0" else a_index_ranges(s, kind, e)
            for idx in idxs:
                if _special_ok(kind, idx, e, special):
                    out.append(State(kind, (e,), idx))
    for eL in labels:
        for eR in labels:
            if _same(s.v_left(inv(eL)), s.v_right(inv(eR))):
                out.append(B(eL, eR))
    for eL in labels:
        n = c_petals(s, eL)
        if n is None:
            continue
        for eR in labels:
            for k in range(1, n - 1):
                if _iterate(rot_l, inv(eL), 2 * k + 1) == eR:
                    out.append(C(k, eL, eR))
    for eL in labels:
        for eR in labels:
            if _same(s.v_right(eL), s.v_left(eR)):
                out.append(D(eL, eR))
    for eL in labels:
        for eM in labels:
            for eR in labels:
                if _same(s.v_left(inv(eL)), s.v_right(inv(eM))) and _same(s.v_right(eM), s.v_left(eR)):
                    out.append(EL(eL, eM, eR))
    for eL in labels:
        for eM in labels:
            for eR in labels:
                if _same(s.v_right(eL), s.v_left(eM)) and _same(s.v_left(inv(eM)), s.v_right(inv(eR))):
                    out.append(ER(eL, eM, eR))
    return sort_states(s, out)


def sort_states(s, states):
    order = {k: i for i, k in enumerate(KINDS)}

    def key(st):
        return (order[st.kind], tuple(s.pos(e) for e in st.labels), st.indices)

    return sorted(states, key=key)


@dataclass
class Coding:
    scheme: object
    states: list
    transition: np.ndarray
    start_set: list
    final_set: list
    involution: list
    special: object = None
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {st: i for i, st in enumerate(self.states)}
        self.successors = [list(np.flatnonzero(row)) for row in self.transition]

    def __len__(self):
        return len(self.states)

    def counts_by_kind(self):
        out = {k: 0 for k in KINDS}
        for st in self.states:
            out[st.kind] += 1
        return out

    def path_count(self, n):
        """Number of admissible paths of n states from the start set to the final set."""
        if n < 1:
            raise CodingError("path length must be at least 1")
        vec = [0] * len(self.states)
        for i in self.start_set:
            vec[i] = 1
        for _ in range(n - 1):
            nxt = [0] * len(vec)
            for i, c in enumerate(vec):
                if c:
                    for j in self.successors[i]:
                        nxt[j] += c
            vec = nxt
        return sum(vec[j] for j in self.final_set)

    def paths(self, n):
        """All admissible start-to-final paths of n states, as index tuples, in lexicographic order."""
        final = set(self.final_set)
        out = []
        stack = [(i,) for i in reversed(self.start_set)]
        while stack:
            p = stack.pop()
            if len(p) == n:
                if p[-1] in final:
                    out.append(p)
                continue
            for j in reversed(self.successors[p[-1]]):
                stack.append(p + (j,))
        return out

    def to_dict(self):
        rows, cols = np.nonzero(self.transition)
        return {
            "scheme": self.scheme.name,
            "states": [st.to_dict() for st in self.states],
            "transitions": [[int(a), int(b)] for a, b in zip(rows, cols)],
            "start": [int(i) for i in self.start_set],
            "final": [int(i) for i in self.final_set],
            "involution": [int(i) for i in self.involution],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False)


class _Table:
    """Successor rules of the transition table, written as label arithmetic."""

    def __init__(self, s, index):
        self.s = s
        self.index = index
        self.l, self.r, self.inv = s.rot_l, s.rot_r, s.inv

    def keep(self, states):
        return [st for st in states if st in self.index]

    def a_family(self, kind, e, i_minus=None, i_plus=None):
        """Existing A-states of a subtype with optional fixed indices."""
        if e is None:
            return []
        if kind == "A0":
            return [A0(e)]
        out = []
        for a, b in a_index_ranges(self.s, kind, e):
            if (i_minus is None or a == i_minus) and (i_plus is None or b == i_plus):
                out.append(State(kind, (e,), (a, b)))
        return out

    def fresh(self, blocked):
        """A0, A_L[1,*], A_R[1,*] and B successors avoiding sides adjacent to ``blocked``."""
        s = self.s
        ok = [e for e in s.labels if not any(s.adjacent(e, x) for x in blocked)]
        out = []
        for e in ok:
            out += self.a_family("A0", e)
            out += self.a_family("AL", e, i_minus=1)
            out += self.a_family("AR", e, i_minus=1)
        for eL in ok:
            for eR in ok:
                out.append(B(eL, eR))
        return out

    def turn_left(self, i_minus, i_plus, e):
        """Successors of A_L[i_-, i_+](e) for i_+ > 1."""
        f = self.l(e)
        out = self.a_family("AL", f, i_minus + 1, i_plus - 1)
        if i_plus == 2:
            out += self.a_family("ALR", f, i_minus=i_minus + 1)
            g = self.l(self.inv(f))
            if g is not None:
                out.append(B(f, g))
        return out

    def turn_right(self, i_minus, i_plus, e):
        f = self.r(e)
        out = self.a_family("AR", f, i_minus + 1, i_plus - 1)
        if i_plus == 2:
            out += self.a_family("ARL", f, i_minus=i_minus + 1)
            g = self.r(self.inv(f))
            if g is not None:
                out.append(B(g, f))
        return out

    def after_c_chain(self, eL, eR):
        l, r, inv = self.l, self.r, self.inv
        a, b = r(eL), l(eR)
        out = [D(a, b)]
        if a is not None and r(inv(a)) is not None:
            out.append(EL(r(inv(a)), a, b))
        if b is not None and l(inv(b)) is not None:
            out.append(ER(a, b, l(inv(b))))
        return out

    def from_b(self, eL, eR):
        n = self.s.petals_left(self.inv(eL))
        if n is None:
            return []
        if n >= 3:
            return [C(1, self.r(eL), self.l(eR))]
        return self.after_c_chain(eL, eR)

    def from_d(self, eL, eR):
        s, inv = self.s, self.inv
        blocked = (inv(eL), inv(eR))
        out = [st for st in self.fresh(blocked) if st.kind != "B"]
        for fL in s.labels:
            for fR in s.labels:
                if self._d_to_b_ok((fL, fR), blocked):
                    out.append(B(fL, fR))
        fl, fr = self.l(eL), self.r(eR)
        out += self.a_family("AL", fl, i_minus=2)
        out += self.a_family("ALR", fl, i_minus=2)
        out += self.a_family("AR", fr, i_minus=2)
        out += self.a_family("ARL", fr, i_minus=2)
        return out

    def _d_to_b_ok(self, new, blocked):
        s = self.s
        for f in new:
            for x in blocked:
                if f == x:
                    return False
                v = s.adjacency_vertex(f, x)
                if v is not None and v.petals <= 2:
                    return False
        return True

    def successors(self, st):
        k, lab, idx = st.kind, st.labels, st.indices
        if k == "A0":
            out = self.fresh((self.inv(lab[0]),))
        elif k in ("AL", "AR"):
            if idx[1] == 1:
                out = self.fresh((self.inv(lab[0]),))
            elif k == "AL":
                out = self.turn_left(idx[0], idx[1], lab[0])
            else:
                out = self.turn_right(idx[0], idx[1], lab[0])
        elif k == "ARL":
            out = self.turn_left(1, idx[1], lab[0])
        elif k == "ALR":
            out = self.turn_right(1, idx[1], lab[0])
        elif k == "B":
            out = self.from_b(*lab)
        elif k == "C":
            n = c_petals(self.s, lab[0])
            if idx[0] < n - 2:
                out = [C(idx[0] + 1, self.r(lab[0]), self.l(lab[1]))]
            else:
                out = self.after_c_chain(*lab)
        elif k == "D":
            out = self.from_d(*lab)
        elif k == "EL":
            out = self.from_b(lab[0], lab[1])
        else:
            out = self.from_b(lab[1], lab[2])
        return self.keep(out)


def involution(c_or_scheme, j):
    """The time-reversed state of j."""
    s = getattr(c_or_scheme, "scheme", c_or_scheme)
    inv = s.inv
    k, lab, idx = j.kind, j.labels, j.indices
    if k == "A0":
        return A0(inv(lab[0]))
    if k in ("AL", "AR", "ALR", "ARL"):
        # reversal swaps past/future and left/right, so i'_{-,L} = i_{+,R}: A_LR stays A_LR
        swap = {"AL": "AR", "AR": "AL", "ALR": "ALR", "ARL": "ARL"}[k]
        return State(swap, (inv(lab[0]),), (idx[1], idx[0]))
    if k == "B":
        return D(inv(lab[1]), inv(lab[0]))
    if k == "D":
        return B(inv(lab[1]), inv(lab[0]))
    if k == "C":
        n = c_petals(s, lab[0])
        return C(n - idx[0] - 1, inv(lab[1]), inv(lab[0]))
    return State(k, (inv(lab[2]), inv(lab[1]), inv(lab[0])))


def start_final(s, states, special=None):
    if special is None:
        special = s.special_label()
    start, final = [], []
    for i, st in enumerate(states):
        k, idx = st.kind, st.indices
        if k in ("A0", "B") or (k in ("AL", "AR") and idx[0] == 1):
            start.append(i)
        if k in ("A0", "D") or (k in ("AL", "AR") and idx[1] == 1):
            final.append(i)
        if special is not None and k in ("ALR", "ARL") and st.labels[0] == special:
            if idx[0] == 2:
                start.append(i)
            if idx[1] == 2:
                final.append(i)
    return sorted(start), sorted(final)


def build_transitions(s, states=None, special=None):
    if special is None:
        special = s.special_label()
    if states is None:
        states = build_states(s, special)
    index = {st: i for i, st in enumerate(states)}
    table = _Table(s, index)
    pi = np.zeros((len(states), len(states)), dtype=np.uint8)
    for i, st in enumerate(states):
        for t in table.successors(st):
            pi[i, index[t]] = 1
    start, final = start_final(s, states, special)
    iota = []
    for st in states:
        t = involution(s, st)
        if t not in index:
            raise CodingError(f"involution leaves the state set at {st}")
        iota.append(index[t])
    return Coding(s, list(states), pi, start, final, iota, special, index)


def build_coding(s):
    return build_transitions(s, build_states(s))


# -- verification --------------------------------------------------------------

def check_reversibility(c):
    pi = np.asarray(c.transition)
    iota = np.asarray(c.involution)
    if sorted(iota[iota]) != list(range(len(iota))) or not np.array_equal(iota[iota], np.arange(len(iota))):
        return False
    if not np.array_equal(pi[np.ix_(iota, iota)], pi.T):
        return False
    start, final = set(c.start_set), set(c.final_set)
    return {int(iota[i]) for i in start} == final and {int(iota[i]) for i in final} == start


def strongly_connected(c):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    pi = np.asarray(c.transition if hasattr(c, "transition") else c)
    if len(pi) == 0:
        return False
    n, _ = connected_components(csr_matrix(pi), directed=True, connection="strong")
    return n == 1


def period(c):
    """gcd of cycle lengths of a strongly connected digraph (BFS level differences)."""
    pi = np.asarray(c.transition if hasattr(c, "transition") else c)
    level = {0: 0}
    queue = [0]
    g = 0
    for u in queue:
        for v in np.flatnonzero(pi[u]):
            v = int(v)
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g)


def aperiodic(c):
    return strongly_connected(c) and period(c) == 1


def positivity_index(c, cap=512):
    """Least N with all entries of Pi^N positive."""
    pi = (np.asarray(c.transition if hasattr(c, "transition") else c) > 0).astype(np.float64)
    cur = pi.copy()
    for n in range(1, cap + 1):
        if cur.all():
            return n
        cur = ((cur @ pi) > 0).astype(np.float64)
    raise CodingError(f"no positive power up to {cap}")
