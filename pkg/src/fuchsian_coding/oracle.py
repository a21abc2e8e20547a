"""Geometric ground truth: Möbius realizations, Cayley balls and thickened paths.

Words multiply left to right: the domain reached by crossing sides with
labels e1, ..., en from R is (e1 ... en) R, and its matrix is M(e1) ... M(en).
Group elements are identified either exactly (integer matrices up to sign)
or by the orbit of the base point on the hyperboloid, quantized on a unit
grid.  Distinct orbit points are far apart compared to the grid, so a grid
cell holds at most one of them.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .scheme import load_catalog

FREE_GENERATORS = {"a": ((1, 2), (0, 1)), "b": ((1, 0), (2, 1))}

MAX_RADIUS = {"free-f2-ideal-quad": 12, "genus2-octagon": 6}

_CAYLEY = np.array([[1, -1j], [1, 1j]]) / np.sqrt(2j)


class OracleError(ValueError):
    pass


class VertexHit(OracleError):
    pass


def _su11_normalize(m):
    return m / np.sqrt(np.linalg.det(m))


def _rot(theta):
    return np.array([[np.exp(0.5j * theta), 0], [0, np.exp(-0.5j * theta)]])


def _translate(d):
    c, s = math.cosh(d / 2), math.sinh(d / 2)
    return np.array([[c, s], [s, c]], dtype=complex)


def mobius(m, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def hyperboloid(m):
    """Hyperboloid coordinates of m(0) for SU(1,1) matrices of shape (..., 2, 2)."""
    al, be = m[..., 0, 0], m[..., 0, 1]
    x0 = np.abs(al) ** 2 + np.abs(be) ** 2
    w = 2 * al * be
    return np.stack([x0, w.real, w.imag], axis=-1)


def disk_point(x):
    x = np.asarray(x)
    return (x[..., 1] + 1j * x[..., 2]) / (1 + x[..., 0])


@dataclass
class GeodesicSide:
    label: str
    start: complex
    end: complex
    center: complex
    radius: float

    def beyond(self, z):
        return abs(z - self.center) < self.radius


def _circle_through(p, q):
    """Circle orthogonal to the unit circle through disk or ideal points p and q."""
    if abs(abs(p) - 1) < 1e-12 and abs(abs(q) - 1) < 1e-12:
        c = 2 * (p + q) / abs(p + q) ** 2
        return c, math.sqrt(abs(c) ** 2 - 1)
    if abs(abs(p) - 1) < 1e-12:
        p, q = q, p
    r = 1 / np.conj(p)
    a = np.array([[2 * (q - p).real, 2 * (q - p).imag], [2 * (r - p).real, 2 * (r - p).imag]])
    b = np.array([abs(q) ** 2 - abs(p) ** 2, abs(r) ** 2 - abs(p) ** 2])
    x, y = np.linalg.solve(a, b)
    c = complex(x, y)
    return c, abs(p - c)


@dataclass
class MobiusRealization:
    name: str
    scheme: object
    generator_matrices: dict
    exact: bool
    disk_matrices: dict
    sides: list
    base_point: complex = 0j
    identification_radius: float = 1e-4
    _registry: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.scheme.labels)
        self._word_matrix = lru_cache(maxsize=None)(self._word_matrix_uncached)

    # -- words and keys ---------------------------------------------------
    def matrix(self, word):
        return self._word_matrix(tuple(word))

    def _word_matrix_uncached(self, word):
        if not word:
            if self.exact:
                return np.eye(2, dtype=np.int64)
            return np.eye(2, dtype=complex)
        return self._word_matrix(word[:-1]) @ self.generator_matrices[word[-1]]

    def disk_matrix(self, word):
        m = self.matrix(word)
        if self.exact:
            return _CAYLEY @ m.astype(complex) @ np.linalg.inv(_CAYLEY)
        return m

    def key(self, word):
        """Canonical hashable id of the group element spelled by ``word``."""
        m = self.matrix(word)
        return self.matrix_keys(m[None])[0]

    def matrix_keys(self, mats):
        """Canonical keys for a stack of matrices, shape (k, 2, 2)."""
        return [tuple(row) for row in self.key_array(mats).tolist()]

    def key_array(self, mats):
        if self.exact:
            flat = mats.reshape(len(mats), 4).astype(np.int64)
            nz = np.argmax(flat != 0, axis=1)
            sign = np.sign(flat[np.arange(len(flat)), nz])
            return flat * sign[:, None]
        return self._float_keys(mats)

    def _float_keys(self, mats):
        x = hyperboloid(mats)
        keys = np.floor(x + 0.5).astype(np.int64)
        frac = x + 0.5 - np.floor(x + 0.5)
        near = np.minimum(frac, 1 - frac) < self.identification_radius
        for i in np.flatnonzero(near.any(axis=1)):
            keys[i] = self._resolve(x[i], keys[i], near[i])
        return keys

    def _resolve(self, x, key, near):
        alts = [tuple(key)]
        for d in np.flatnonzero(near):
            step = 1 if x[d] + 0.5 - key[d] > 0.5 else -1
            alts += [k[:d] + (k[d] + step,) + k[d + 1:] for k in alts]
        for k in alts:
            hit = self._registry.get(k)
            if hit is not None and np.linalg.norm(hit - x) < 0.5:
                return k
        self._registry[tuple(key)] = np.array(x)
        return key

    def relator_audit(self, tol=1e-9):
        """Max deviation from ±I over all vertex relators (0 when there are none)."""
        worst = 0.0
        for i, c in enumerate(self.scheme.corners):
            if c is None:
                continue
            m = self.matrix(self.scheme.vertex_relator(i))
            eye = np.eye(2)
            worst = max(worst, min(np.abs(m - eye).max(), np.abs(m + eye).max()))
        if worst > tol:
            raise OracleError(f"vertex relator deviates from identity by {worst:g}")
        return worst

    # -- point location ----------------------------------------------------
    def locate(self, z, max_steps=10000):
        """Word u with z in u R (z a disk point)."""
        word = []
        inv = self.scheme.inv
        for _ in range(max_steps):
            for side in self.sides:
                if side.beyond(z):
                    e = side.label
                    word.append(inv(e))
                    z = mobius(self.disk_generators[e], z)
                    break
            else:
                return tuple(reduce_word(self.scheme, word))
        raise OracleError("point location did not terminate")

    @property
    def disk_generators(self):
        if not hasattr(self, "_dg"):
            self._dg = {e: self.disk_matrix((e,)) for e in self.labels}
        return self._dg


def reduce_word(scheme, word):
    """Free reduction against the pairing (e e^{-1} cancels; a self-paired e squares to 1)."""
    out = []
    for e in word:
        if out and scheme.inv(out[-1]) == e:
            out.pop()
        else:
            out.append(e)
    return out


def _label_sides(scheme, disk_gens, polygon):
    """Attach interior labels to geometric sides: e^{-1} R lies beyond the side labelled e."""
    sides = []
    for start, end in polygon:
        c, r = _circle_through(start, end)
        sides.append(GeodesicSide(None, start, end, c, r))
    for e in scheme.labels:
        p = mobius(np.linalg.inv(disk_gens[e]), 0j)
        hits = [s for s in sides if s.beyond(p)]
        if len(hits) != 1:
            raise OracleError(f"cannot place side of {e}")
        hits[0].label = e
    return sides


def _free_realization(scheme):
    mats = {}
    for e, m in FREE_GENERATORS.items():
        m = np.array(m, dtype=np.int64)
        mats[e] = m
        mats[scheme.inv(e)] = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=np.int64)
    ci = np.linalg.inv(_CAYLEY)
    disk = {e: _CAYLEY @ m.astype(complex) @ ci for e, m in mats.items()}
    to_disk = lambda z: 1 + 0j if z is None else (z - 1j) / (z + 1j)
    ideal = [None, -1, 0, 1]  # the quadrilateral with vertices oo, -1, 0, 1, counterclockwise
    pts = [to_disk(z) for z in ideal]
    polygon = [(pts[i], pts[(i + 1) % 4]) for i in range(4)]
    sides = _label_sides(scheme, disk, polygon)
    return MobiusRealization(scheme.name, scheme, mats, True, disk, sides)


def octagon_geometry():
    """Inradius, vertex radius (Euclidean, disk) of the regular octagon with angles pi/4."""
    r_in = math.acosh(1 / math.tan(math.pi / 8))
    vertex = 2 ** -0.25
    return r_in, vertex


def _octagon_realization(scheme):
    N = scheme.N
    r_in, vr = octagon_geometry()
    theta = [2 * math.pi * k / N for k in range(N)]
    mats = {}
    for e in scheme.labels:
        i, j = scheme.pos(e), scheme.pos(scheme.inv(e))
        m = _rot(theta[j]) @ _translate(2 * r_in) @ _rot(math.pi - theta[i])
        mats[e] = _su11_normalize(m)
    corners = [vr * np.exp(1j * (theta[k] + math.pi / N)) for k in range(N)]
    polygon = [(corners[k - 1], corners[k]) for k in range(N)]
    sides = _label_sides(scheme, mats, polygon)
    for k, s in enumerate(sides):
        if s.label != scheme.label_at(k):
            raise OracleError("octagon side labels disagree with the scheme")
    real = MobiusRealization(scheme.name, scheme, mats, False, mats, sides)
    real.relator_audit()
    return real


def realize_group(name):
    if name == "free-f2-ideal-quad":
        return _free_realization(load_catalog(name))
    if name == "genus2-octagon":
        return _octagon_realization(load_catalog(name))
    if name == "triangle-special-case":
        raise OracleError("triangle-special-case is combinatorial only: no realization")
    raise OracleError(f"unknown group {name!r}")


def _modular_model(scheme):
    """PSL(2,Z) acting on the standard triangle; used only to identify words."""
    mats = {"g": np.array([[0, -1], [1, 0]], dtype=np.int64),
            "t": np.array([[1, -1], [0, 1]], dtype=np.int64),
            "T": np.array([[1, 1], [0, 1]], dtype=np.int64)}
    return MobiusRealization(scheme.name, scheme, mats, True, {}, [])


def word_identifier(name):
    """Realization whose ``key`` identifies words of a catalog scheme.

    The triangle has no geometric realization here, but its words are
    identified exactly in PSL(2,Z), which it tiles.
    """
    if name == "triangle-special-case":
        return _modular_model(load_catalog(name))
    return realize_group(name)


# -- Cayley balls -----------------------------------------------------------

class CayleyBall:
    """BFS ball of the Cayley graph (right multiplication by G_0)."""

    def __init__(self, realization, radius):
        cap = MAX_RADIUS.get(realization.name)
        if cap is not None and radius > cap:
            raise OracleError(f"radius {radius} beyond the audited range {cap}")
        self.realization = realization
        self.radius = radius
        self._build()

    def _build(self):
        real = self.realization
        labels = real.labels
        gens = np.stack([real.generator_matrices[e] for e in labels])
        eye = real.matrix(())
        mats = [eye[None]]
        keys = [np.array([real.key(())], dtype=np.int64)]
        parent = [np.array([-1])]
        pgen = [np.array([-1])]
        offsets = [0]
        total = 1
        for n in range(self.radius):
            front = mats[-1]
            cand = (front[:, None] @ gens[None]).reshape(-1, 2, 2)
            ck = real.key_array(cand)
            known = np.concatenate(keys[-2:])
            allr = np.concatenate([known, ck])
            first = _first_occurrences(allr)
            new = np.sort(first[first >= len(known)] - len(known))
            mats.append(cand[new])
            keys.append(ck[new])
            parent.append(offsets[-1] + new // len(labels))
            pgen.append(new % len(labels))
            offsets.append(total)
            total += len(new)
        self.offsets = offsets + [total]
        self.keys = np.concatenate(keys)
        self.matrices = np.concatenate(mats)
        self.parent = np.concatenate(parent)
        self.parent_gen = np.concatenate(pgen)
        self.distance = np.concatenate([np.full(self.offsets[k + 1] - self.offsets[k], k)
                                        for k in range(self.radius + 1)])
        self._index = None

    def __len__(self):
        return len(self.keys)

    def sphere_indices(self, n):
        if n < 0 or n > self.radius:
            raise OracleError(f"sphere {n} outside the ball of radius {self.radius}")
        return range(self.offsets[n], self.offsets[n + 1])

    def sphere_sizes(self):
        return [self.offsets[k + 1] - self.offsets[k] for k in range(self.radius + 1)]

    def index(self):
        if self._index is None:
            self._index = {tuple(k): i for i, k in enumerate(self.keys.tolist())}
        return self._index

    def index_of_key(self, key):
        i = self.index().get(tuple(key))
        if i is None:
            raise OracleError("element outside the ball")
        return i

    def word(self, i):
        labels = self.realization.labels
        out = []
        while self.parent[i] >= 0:
            out.append(labels[self.parent_gen[i]])
            i = self.parent[i]
        return tuple(reversed(out))

    def dist_of_key(self, key):
        return int(self.distance[self.index_of_key(key)])


def _first_occurrences(rows):
    """Index of the first occurrence of each distinct row."""
    order = np.lexsort(rows.T[::-1])
    srt = rows[order]
    head = np.ones(len(rows), dtype=bool)
    head[1:] = (srt[1:] != srt[:-1]).any(axis=1)
    return order[head]


def cayley_ball(realization, radius):
    return CayleyBall(realization, radius)


_BALLS = {}


def shared_ball(realization, radius):
    """Cached ball per realization; grows when a larger radius is asked for."""
    ball = _BALLS.get(id(realization))
    if ball is None or ball.radius < radius:
        ball = CayleyBall(realization, radius)
        _BALLS[id(realization)] = ball
    return ball


def sphere(ball, n):
    return {tuple(ball.keys[i]) for i in ball.sphere_indices(n)}


def distance(ball, word):
    return ball.dist_of_key(ball.realization.key(word))


def same_element(realization, w1, w2):
    return realization.key(w1) == realization.key(w2)


def separation_audit(ball):
    """Smallest hyperbolic distance between distinct orbit points of the base point."""
    # the orbit is G-invariant, so the minimum over pairs is the minimum d(O, gO)
    real = ball.realization
    mats = ball.matrices[1:]
    if real.exact:
        ci = np.linalg.inv(_CAYLEY)
        mats = _CAYLEY[None] @ mats.astype(complex) @ ci[None]
    if len(mats) == 0:
        return math.inf
    return float(np.arccosh(np.maximum(hyperboloid(mats)[:, 0], 1.0)).min())


# -- thickened paths and shortest paths --------------------------------------

def geodesic_levels(realization, ball, word):
    """Levels of the union of all shortest paths from R to word R, as lists of ball indices."""
    real = realization
    target = ball.index_of_key(real.key(word))
    n = int(ball.distance[target])
    levels = [None] * (n + 1)
    levels[n] = [target]
    for k in range(n - 1, -1, -1):
        cur = set()
        for j in levels[k + 1]:
            w = ball.word(j)
            for e in real.labels:
                key = real.key(w + (e,))
                i = ball.index().get(key)
                if i is not None and ball.distance[i] == k:
                    cur.add(i)
        levels[k] = sorted(cur)
    return levels


def brute_thickened(realization, ball, A, B):
    """Union of all shortest domain paths from A R to B R, indexed by distance from A.

    A and B are words (or Domains); the result is a walker.ThickPath whose
    domains are words starting with A.
    """
    from .walker import ThickPath, Domain, Tessellation

    A = tuple(getattr(A, "word", A))
    B = tuple(getattr(B, "word", B))
    scheme = realization.scheme
    rel = tuple(reduce_word(scheme, [scheme.inv(e) for e in reversed(A)] + list(B)))
    levels = geodesic_levels(realization, ball, rel)
    out = []
    for lev in levels:
        out.append([Domain(tuple(reduce_word(scheme, A + ball.word(i)))) for i in lev])
    return ThickPath.from_sets(out, Tessellation(scheme, realization.key))


def shortest_paths(realization, ball, word):
    """All shortest domain paths from R to word R as tuples of ball indices."""
    levels = geodesic_levels(realization, ball, word)
    real = realization
    adj = []
    for k in range(len(levels) - 1):
        nxt = set(levels[k + 1])
        table = {}
        for i in levels[k]:
            w = ball.word(i)
            table[i] = [j for j in (ball.index().get(real.key(w + (e,))) for e in real.labels)
                        if j in nxt]
        adj.append(table)
    out = []
    stack = deque([(levels[0][0],)])
    while stack:
        path = stack.pop()
        if len(path) == len(levels):
            out.append(path)
            continue
        for j in adj[len(path) - 1][path[-1]]:
            stack.append(path + (j,))
    return sorted(out)


def geodesic_cross_section(realization, a, b, rng=None, jitter=1e-7, retries=8):
    """Domains (as Domains) crossed by the geodesic segment from disk point a to b."""
    from .walker import Domain

    rng = np.random.default_rng(0) if rng is None else rng
    for attempt in range(retries + 1):
        try:
            words = _cross_section(realization, a, b)
            return [Domain(w) for w in words]
        except VertexHit:
            a = a + jitter * complex(*rng.normal(size=2))
            b = b + jitter * complex(*rng.normal(size=2))
    raise VertexHit("geodesic keeps hitting tessellation vertices")


def _cross_section(real, a, b):
    phi_a = np.array([[1, -a], [-np.conj(a), 1]])
    phi_inv = np.linalg.inv(phi_a)
    bb = mobius(phi_a, b)

    def point(t):
        return mobius(phi_inv, t * bb)

    def loc(t):
        w = real.locate(point(t))
        return w, real.key(w)

    out = []

    def refine(t1, d1, t2, d2, depth=0):
        if d1[1] == d2[1]:
            return
        if depth > 60:
            raise VertexHit("segment passes through a vertex")
        if _crosses_shared_side(real, d1[0], d2[0], point(t1), point(t2)):
            out.append(d2)
            return
        tm = 0.5 * (t1 + t2)
        dm = loc(tm)
        refine(t1, d1, tm, dm, depth + 1)
        refine(tm, dm, t2, d2, depth + 1)

    d0 = loc(0.0)
    out.append(d0)
    refine(0.0, d0, 1.0, loc(1.0))
    return [w for w, _ in out]


def _crosses_shared_side(real, w1, w2, p1, p2):
    scheme = real.scheme
    # neighbours across a relator need not differ by one letter after free reduction
    k2 = real.key(tuple(w2))
    e = next((f for f in scheme.labels if real.key(tuple(w1) + (f,)) == k2), None)
    if e is None:
        return False
    # in the frame of w1 R the shared side has interior label e^{-1}
    side = next(s for s in real.sides if s.label == scheme.inv(e))
    m = np.linalg.inv(real.disk_matrix(w1))
    q1, q2 = mobius(m, p1), mobius(m, p2)
    phi = np.array([[1, -q1], [-np.conj(q1), 1]])
    d = mobius(phi, q2)

    def side_of(z):
        return np.sign((mobius(phi, z) * np.conj(d)).imag)

    return side_of(side.start) * side_of(side.end) < 0
