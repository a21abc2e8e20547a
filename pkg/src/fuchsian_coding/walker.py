"""Thickened paths: realization of state sequences, reading states back, convexification.

Domains are words; whether two words give the same domain is decided by an
identification function (``key``) supplied by the caller, normally the oracle.
Nothing here does geometry: all local structure comes from the polygon scheme.
"""

import json
from dataclasses import dataclass

from . import coding as cd


class WalkerError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    word: tuple = ()

    def __str__(self):
        return "".join(self.word) or "R"


def reduce_word(s, word):
    out = []
    for e in word:
        if out and s.inv(out[-1]) == e:
            out.pop()
        else:
            out.append(e)
    return tuple(out)


def inverse_word(s, word):
    return tuple(s.inv(e) for e in reversed(word))


class Tessellation:
    """Combinatorial view of the tiling: neighbours, flowers and vertex ids."""

    def __init__(self, scheme, key):
        self.s = scheme
        self._key = key
        self._cache = {}

    def key(self, d):
        w = d.word if isinstance(d, Domain) else tuple(d)
        k = self._cache.get(w)
        if k is None:
            k = self._cache[w] = self._key(w)
        return k

    def same(self, x, y):
        return self.key(x) == self.key(y)

    def neighbor(self, d, f):
        return Domain(reduce_word(self.s, d.word + (f,)))

    def step(self, x, y):
        """The label f with y = x f, or None when x and y are not adjacent."""
        ky = self.key(y)
        for f in self.s.labels:
            if self.key(self.neighbor(x, f)) == ky:
                return f
        return None

    def flower(self, d, c):
        """The 2n(v) petals around corner c of d, as (domain, corner) pairs in walk order."""
        corner = self.s.corner(c)
        if corner is None:
            return None
        out = [(d, c % self.s.N)]
        for _ in range(2 * corner.petals - 1):
            f, c = self.s.flower_step(c)
            d = self.neighbor(d, f)
            out.append((d, c))
        return out

    def vertex(self, d, c):
        """(vertex id, set of petal keys) for corner c of d; None at an ideal end."""
        fl = self.flower(d, c)
        if fl is None:
            return None
        vid = min((self.key(x), cc) for x, cc in fl)
        return vid, {self.key(x) for x, _ in fl}


def identity_key(scheme):
    """Identification by free reduction (exact for groups without interior vertices)."""
    return lambda w: reduce_word(scheme, w)


@dataclass
class ThickPath:
    levels: list

    def __post_init__(self):
        self.levels = [tuple(lv) for lv in self.levels]
        if not self.levels:
            raise WalkerError("empty thickened path")
        if len(self.levels[0]) != 1 or len(self.levels[-1]) != 1:
            raise WalkerError("first and last levels must be single domains")
        for lv in self.levels:
            if not 1 <= len(lv) <= 2:
                raise WalkerError(f"level with {len(lv)} domains")

    @property
    def N(self):
        return len(self.levels) - 1

    def domains(self):
        return [d for lv in self.levels for d in lv]

    def level_keys(self, tess):
        return [frozenset(tess.key(d) for d in lv) for lv in self.levels]

    def to_dict(self):
        return {"levels": [[list(d.word) for d in lv] for lv in self.levels]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_sets(cls, sets, tess):
        """Build from unordered level sets, fixing left/right from the level before."""
        levels = []
        for k, lv in enumerate(sets):
            lv = list(lv)
            if len(lv) > 2:
                raise WalkerError(f"level {k} has {len(lv)} domains")
            if len(lv) == 2:
                lv = _orient(tess, levels[-1], lv)
            levels.append(tuple(lv))
        return cls(levels)


def thick_path_svg(t, tess):
    """Schematic level diagram: one column per level, edges between adjacent domains."""
    dx, dy, r = 90, 60, 22
    height = dy * 2 + 40
    pos = {}
    parts = []
    for k, lv in enumerate(t.levels):
        for i, d in enumerate(lv):
            y = height / 2 if len(lv) == 1 else 40 + i * dy * 1.5
            pos[(k, i)] = (40 + k * dx, y)
    doms = [(k, i, d) for k, lv in enumerate(t.levels) for i, d in enumerate(lv)]
    for a in range(len(doms)):
        for b in range(a + 1, len(doms)):
            (k1, i1, d1), (k2, i2, d2) = doms[a], doms[b]
            if abs(k1 - k2) <= 1 and tess.step(d1, d2) is not None:
                (x1, y1), (x2, y2) = pos[(k1, i1)], pos[(k2, i2)]
                parts.append(f'<line x1="{x1:.0f}" y1="{y1:.0f}" x2="{x2:.0f}" y2="{y2:.0f}" stroke="black"/>')
    for k, i, d in doms:
        x, y = pos[(k, i)]
        parts.append(f'<circle cx="{x:.0f}" cy="{y:.0f}" r="{r}" fill="white" stroke="black"/>')
        parts.append(f'<text x="{x:.0f}" y="{y + 4:.0f}" font-size="10" text-anchor="middle">{d}</text>')
    width = 80 + dx * t.N
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0f}">'
            + "".join(parts) + "</svg>\n")


def _orient(tess, past, fut):
    s = tess.s
    a, b = fut
    if len(past) == 1:
        p = past[0]
        fa, fb = tess.step(p, a), tess.step(p, b)
        if fa is None or fb is None:
            raise WalkerError("two-domain level after a single domain must border it")
        # the left future sits across the later (counterclockwise) of two adjacent sides
        if (s.pos(s.inv(fa)) - s.pos(s.inv(fb))) % s.N == 1:
            return [a, b]
        if (s.pos(s.inv(fb)) - s.pos(s.inv(fa))) % s.N == 1:
            return [b, a]
        raise WalkerError("futures do not sit across adjacent sides")
    pl, pr = past
    la, lb = tess.step(pl, a) is not None, tess.step(pl, b) is not None
    if la != lb:
        return [a, b] if la else [b, a]
    ra, rb = tess.step(pr, a) is not None, tess.step(pr, b) is not None
    if ra != rb:
        return [b, a] if ra else [a, b]
    raise WalkerError("cannot orient level")


# -- gamma, omega, phi ---------------------------------------------------------

def _lwalk(s, x, steps):
    out = []
    for _ in range(steps):
        x = s.rot_l(x)
        if x is None:
            raise WalkerError("flower walk hits an ideal vertex")
        out.append(x)
    return out


def future_offsets(s, st):
    """(F_L, F_R, P_R) as words relative to the left past domain."""
    inv = s.inv
    k, lab = st.kind, st.labels
    if st.is_a:
        w = (lab[0],)
        return w, w, ()
    if k == "B":
        return (lab[0],), (lab[1],), ()
    if k == "C":
        walk = _lwalk(s, inv(lab[0]), 2 * st.indices[0] + 1)
        return (lab[0],), tuple(walk), tuple(walk[:-1])
    if k == "D":
        return (lab[0],), (lab[0],), (lab[0], inv(lab[1]))
    if k == "EL":
        return (lab[0],), (lab[1],), (lab[1], inv(lab[2]))
    return (lab[0],), (lab[0], inv(lab[1]), lab[2]), (lab[0], inv(lab[1]))


def gamma(s, st):
    return inverse_word(s, future_offsets(s, st)[0])


def omega(s, st):
    return inverse_word(s, future_offsets(s, st)[1])


def phi(s, states, coding=None):
    """omega(j_{n-1}) gamma(j_{n-2}) ... gamma(j_0), freely reduced."""
    states = list(states)
    if not states:
        raise WalkerError("empty path")
    if coding is not None:
        _check_admissible(coding, states)
    word = omega(s, states[-1])
    for st in reversed(states[:-1]):
        word = word + gamma(s, st)
    return reduce_word(s, word)


def _check_admissible(coding, states, full=True):
    idx = coding.index
    try:
        ids = [idx[st] for st in states]
    except KeyError as exc:
        raise WalkerError(f"not a state: {exc}") from None
    for a, b in zip(ids, ids[1:]):
        if not coding.transition[a, b]:
            raise WalkerError(f"inadmissible transition {coding.states[a]} -> {coding.states[b]}")
    if full:
        if ids[0] not in set(coding.start_set):
            raise WalkerError("path does not start in the start set")
        if ids[-1] not in set(coding.final_set):
            raise WalkerError("path does not end in the final set")


def _two_past(st):
    return st.kind in ("C", "D", "EL", "ER")


def _two_future(st):
    return st.kind in ("B", "C", "EL", "ER")


def realize(s, states, base=Domain(), tess=None, coding=None, full=True):
    """Thickened path realizing a state sequence, starting from ``base``."""
    states = list(states)
    if coding is not None:
        _check_admissible(coding, states, full)
    first = states[0]
    if _two_past(first):
        pr = Domain(reduce_word(s, base.word + future_offsets(s, first)[2]))
        levels = [(base, pr)]
    else:
        levels = [(base,)]
    for k, st in enumerate(states):
        cur = levels[-1]
        if len(cur) != (2 if _two_past(st) else 1):
            raise WalkerError(f"state {st} does not fit level {k}")
        fl, fr, pr = future_offsets(s, st)
        pl = cur[0]
        if len(cur) == 2 and tess is not None:
            if not tess.same(Domain(pl.word + pr), cur[1]):
                raise WalkerError(f"state {st} disagrees with the right past domain")
        FL = Domain(reduce_word(s, pl.word + fl))
        FR = Domain(reduce_word(s, pl.word + fr))
        levels.append((FL, FR) if _two_future(st) else (FL,))
    if len(levels[0]) == 2 or len(levels[-1]) == 2:
        if full:
            raise WalkerError("path must start and end with single domains")
        return levels
    return ThickPath(levels)


# -- reading states --------------------------------------------------------

def _a_subtype(iLm, iLp, iRm, iRp):
    if iRm == iRp == 1 and iLm == iLp == 1:
        return "A0", ()
    if iRm == iRp == 1:
        return "AL", (iLm, iLp)
    if iLm == iLp == 1:
        return "AR", (iRm, iRp)
    if iLp == iRm == 1:
        return "ALR", (iLm, iRp)
    if iLm == iRp == 1:
        return "ARL", (iRm, iLp)
    raise WalkerError("impossible corner occupancy")


def configurations(t, tess):
    """Undecorated configurations of consecutive level pairs as (kind, labels, extra)."""
    s = tess.s
    out = []
    for k in range(t.N):
        P, F = t.levels[k], t.levels[k + 1]
        if len(P) == 1 and len(F) == 1:
            f = tess.step(P[0], F[0])
            if f is None:
                raise WalkerError(f"levels {k}, {k + 1} are not adjacent")
            out.append(("A", (f,)))
        elif len(P) == 1:
            eL, eR = tess.step(P[0], F[0]), tess.step(P[0], F[1])
            out.append(("B", (eL, eR)))
        elif len(F) == 1:
            eL, eR = tess.step(P[0], F[0]), tess.step(P[1], F[0])
            out.append(("D", (eL, eR)))
        else:
            pl, pr = P
            fl, fr = F
            a, b = tess.step(pl, fl), tess.step(pl, fr)
            c, d = tess.step(pr, fl), tess.step(pr, fr)
            if a and d and not b and not c:
                out.append(("C", (a, d)))
            elif a and b and d and not c:
                out.append(("EL", (a, b, d)))
            elif a and c and d and not b:
                out.append(("ER", (a, c, d)))
            else:
                raise WalkerError(f"levels {k}, {k + 1}: no configuration fits")
        if None in out[-1][1]:
            raise WalkerError(f"levels {k}, {k + 1}: missing adjacency")
    return out


def states_of(t, tess, special=None):
    """The decorated state sequence of a thickened path."""
    s = tess.s
    if special is None:
        special = s.special_label()
    confs = configurations(t, tess)
    keys = t.level_keys(tess)
    out = []
    for k, (kind, lab) in enumerate(confs):
        if kind == "A":
            e = lab[0]
            F = t.levels[k + 1][0]
            counts = []
            for c in (s.pos(e) - 1, s.pos(e)):
                v = tess.vertex(F, c)
                if v is None:
                    counts.append((1, 1))
                    continue
                petals = v[1]
                before = sum(1 for m in range(k + 1) if keys[m] & petals)
                after = sum(1 for m in range(k + 1, len(keys)) if keys[m] & petals)
                counts.append((before, after))
            (iLm, iLp), (iRm, iRp) = counts
            if e == special and k == 0 and t.N > 1:
                # virtual domain before the path, on the side the future does not turn to
                if iLp >= 2:
                    iRm = 2
                elif iRp >= 2:
                    iLm = 2
            if e == special and k == t.N - 1 and t.N > 1:
                if iLm >= 2:
                    iRp = 2
                elif iRm >= 2:
                    iLp = 2
            sub, idx = _a_subtype(iLm, iLp, iRm, iRp)
            out.append(cd.State(sub, (e,), idx))
        elif kind == "C":
            eL, eR = lab
            pl, pr = t.levels[k]
            n = cd.c_petals(s, eL)
            found = None
            for kk in range(1, n - 1):
                walk = _lwalk(s, s.inv(eL), 2 * kk + 1)
                if walk[-1] == eR and tess.same(Domain(pl.word + tuple(walk[:-1])), pr):
                    found = kk
                    break
            if found is None:
                raise WalkerError(f"levels {k}, {k + 1}: C configuration without a valid sector")
            out.append(cd.C(found, eL, eR))
        else:
            out.append(cd.State(kind, tuple(lab)))
    return out


# -- locally shortest paths and convexification -------------------------------

@dataclass
class Certificate:
    ok: bool
    reason: str = ""
    vertex: tuple = None

    def __bool__(self):
        return self.ok


def _steps(path, tess):
    out = []
    for a, b in zip(path, path[1:]):
        f = tess.step(a, b)
        if f is None:
            raise WalkerError("consecutive domains are not adjacent")
        out.append(f)
    return out


def boundary(path, tess):
    """Boundary vertices of a domain path in counterclockwise order.

    Returns a cyclic list of entries (vertex id or None for an ideal point,
    petal count c, n(v), (domain index, corner)).
    """
    s = tess.s
    N, Ns = len(path) - 1, s.N
    if N == 0:
        return [(tess.vertex(path[0], c)[0] if s.corner(c) else None, 1,
                 s.corner(c).petals if s.corner(c) else None, (0, c)) for c in range(Ns)]
    f = _steps(path, tess)
    exit_pos = [s.pos(s.inv(x)) for x in f]
    entry_pos = [None] + [s.pos(x) for x in f]
    for i in range(1, N):
        if exit_pos[i] == entry_pos[i]:
            raise WalkerError(f"domain {i} is entered and left through the same side")
    pieces = []  # (domain index, start corner, number of sides)
    pieces.append((0, exit_pos[0], Ns - 1))
    for i in range(1, N):
        pieces.append((i, entry_pos[i], (exit_pos[i] - entry_pos[i] - 1) % Ns))
    pieces.append((N, entry_pos[N], Ns - 1))
    for i in range(N - 1, 0, -1):
        pieces.append((i, exit_pos[i], (entry_pos[i] - exit_pos[i] - 1) % Ns))
    out = []
    n_pieces = len(pieces)
    first = next(j for j, p in enumerate(pieces) if p[2] > 0)
    j = first
    while True:
        i, c0, m = pieces[j]
        # interior corners of this piece
        for t in range(1, m):
            out.append(_ventry(tess, path, i, c0 + t, 1))
        # junction at the end of this piece with the next nonempty one
        end_corner = c0 + m
        span = 1
        nxt = (j + 1) % n_pieces
        while pieces[nxt][2] == 0:
            span += 1
            nxt = (nxt + 1) % n_pieces
        out.append(_ventry(tess, path, i, end_corner, span + 1))
        j = nxt
        if j == first:
            break
    return out


def _ventry(tess, path, i, c, count):
    s = tess.s
    corner = s.corner(c)
    if corner is None:
        return (None, count, None, (i, c % s.N))
    return (tess.vertex(path[i], c)[0], count, corner.petals, (i, c % s.N))


def _chains(bd):
    """Split the cyclic boundary at ideal points; returns (list of chains, cyclic flag)."""
    cut = [j for j, v in enumerate(bd) if v[0] is None]
    if not cut:
        return [bd], True
    chains = []
    for a, b in zip(cut, cut[1:] + [cut[0] + len(bd)]):
        chains.append([bd[j % len(bd)] for j in range(a + 1, b)])
    return chains, False


def is_locally_shortest(path, tess):
    path = list(path)
    try:
        bd = boundary(path, tess)
    except WalkerError as exc:
        return Certificate(False, str(exc))
    for vid, c, n, where in bd:
        if vid is not None and c > n + 1:
            return Certificate(False, f"angle with {c} petals exceeds minimal concavity (n = {n})", where)
    chains, cyclic = _chains(bd)
    for ch in chains:
        marks = [(v, "T") if c == n + 1 else (v, "X") for v, c, n, _ in ch if c != n]
        if cyclic and sum(1 for _, m in marks if m == "T") < 2:
            continue
        seq = marks + marks[:1] if cyclic else marks
        for (v1, m1), (v2, m2) in zip(seq, seq[1:]):
            if m1 == m2 == "T":
                return Certificate(False, "two minimal concavities without a convex angle between", v2)
    return Certificate(True)


def eligible_vertices(bd):
    """The set A(Gamma) of vertices where convexification will act."""
    m = len(bd)
    kind = []
    for v, c, n, _ in bd:
        if v is None:
            kind.append("I")
        elif c == n + 1:
            kind.append("T")
        elif c == n:
            kind.append("S")
        elif c < n:
            kind.append("X")
        else:
            kind.append("?")

    def arc_end(j, step):
        for t in range(1, m + 1):
            q = (j + step * t) % m
            if kind[q] != "S":
                return q
        return None

    out = set()
    for j, (v, c, n, _) in enumerate(bd):
        if kind[j] == "T":
            out.add(v)
        elif kind[j] == "S":
            a, b = arc_end(j, -1), arc_end(j, 1)
            if (a is not None and kind[a] == "T") or (b is not None and kind[b] == "T"):
                out.add(v)
        elif kind[j] == "X" and c == n - 1:
            a, b = arc_end(j, -1), arc_end(j, 1)
            if a is not None and b is not None and kind[a] == "T" and kind[b] == "T":
                out.add(v)
    return out


def convexify(path, tess, order=None):
    """Convexification of a locally shortest path, as a ThickPath.

    ``order`` may be a random generator used to pick among eligible right
    turns (for confluence tests); by default the right turn met first along
    the left boundary is processed first.
    """
    s = tess.s
    path = list(path)
    cert = is_locally_shortest(path, tess)
    if not cert:
        raise WalkerError(f"path is not locally shortest: {cert.reason}")
    region = {}
    for i, d in enumerate(path):
        k = tess.key(d)
        if k in region:
            raise WalkerError("path visits a domain twice")
        region[k] = (d, i)
    expected = eligible_vertices(boundary(path, tess))
    done = set()
    while True:
        turns = _right_turns(region, tess)
        if not turns:
            break
        if order is not None:
            vid = sorted(turns)[order.integers(len(turns))]
        else:
            vid = min(turns, key=lambda v: (turns[v][0], v))
        _, fl = turns[vid]
        if vid in done:
            raise WalkerError("convexification revisits a vertex")
        done.add(vid)
        _add_petals(region, fl, tess)
    if done != expected:
        raise WalkerError("convexification acted outside A(Gamma)")
    N = len(path) - 1
    sets = [[] for _ in range(N + 1)]
    for d, i in region.values():
        sets[i].append(d)
    for lv in sets:
        lv.sort(key=lambda d: (len(d.word), d.word))
    return ThickPath.from_sets(sets, tess)


def _right_turns(region, tess):
    s = tess.s
    seen = {}
    for d, i in region.values():
        for c in range(s.N):
            corner = s.corner(c)
            if corner is None:
                continue
            fl = tess.flower(d, c)
            vid = min((tess.key(x), cc) for x, cc in fl)
            if vid in seen:
                continue
            inside = [tess.key(x) in region for x, _ in fl]
            cnt = sum(inside)
            n = corner.petals
            if cnt == n + 1:
                seen[vid] = (min(region[tess.key(x)][1] for x, _ in fl if tess.key(x) in region), fl)
            elif n + 1 < cnt < 2 * n:
                raise WalkerError("boundary angle beyond minimal concavity during convexification")
            else:
                seen[vid] = None
    return {v: t for v, t in seen.items() if t is not None}


def _add_petals(region, fl, tess):
    m = len(fl)
    inside = [tess.key(x) in region for x, _ in fl]
    idx = [region[tess.key(x)][1] if inside[j] else None for j, (x, _) in enumerate(fl)]
    # rotate so the walk starts at the region petal with the largest index, moving away from the region
    top = max((j for j in range(m) if inside[j]), key=lambda j: idx[j])
    if inside[(top + 1) % m]:
        direction = -1
    else:
        direction = 1
    lo = min(i for i in idx if i is not None)
    hi = idx[top]
    if hi - lo != sum(inside) - 1:
        raise WalkerError("petal indices at a right turn are not consecutive")
    val = hi
    j = top
    added = 0
    while True:
        j = (j + direction) % m
        if inside[j]:
            break
        val -= 1
        x = fl[j][0]
        region[tess.key(x)] = (x, val)
        added += 1
    if val - 1 != lo or added != m - sum(inside):
        raise WalkerError("convexification step does not close up")


def shortest_paths_in(t, tess):
    """All monotone domain paths from level 0 to the last level."""
    nxt = []
    for k in range(t.N):
        nxt.append({j: [q for q, y in enumerate(t.levels[k + 1]) if tess.step(x, y) is not None]
                    for j, x in enumerate(t.levels[k])})
    stack = [(0,)]
    while stack:
        p = stack.pop()
        if len(p) == t.N + 1:
            yield [t.levels[k][j] for k, j in enumerate(p)]
            continue
        for q in reversed(nxt[len(p) - 1][p[-1]]):
            stack.append(p + (q,))
