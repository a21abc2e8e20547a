"""Finite measure-preserving actions and the Markov operators of the coding.

Conventions.  A label ``e`` acts on X by the permutation ``T_e``; a word
``e1 ... ek`` acts by ``T_{e1} o ... o T_{ek}``.  On functions
``T_g f = f o T_g^{-1}``, so ``T_g^{-1} f = f o T_g``.  Fields on
``Y = Xi x X`` are arrays of shape ``(len(Xi), len(X))`` and the inner product
is weighted by ``p_i mu(x)``.  Dense matrices act on the flattened field,
row index ``i * |X| + x``.
"""

import json
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .coding import build_coding
from .parry import parry_for
from .walker import gamma, omega

DENSE_CAP = 20000

ACTIONS = ("trivial", "free-parity", "free-s5", "octagon-z5", "octagon-s5",
           "triangle-p1f5", "triangle-z3")


class ActionError(ValueError):
    pass


# -- actions -------------------------------------------------------------------

@dataclass
class FiniteAction:
    scheme: object
    points: list
    weights: np.ndarray
    generator_permutations: dict
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        return len(self.points)

    def word_permutation(self, word):
        """T_w as an image array: T_w[x] = T_{e1}(...T_{ek}(x))."""
        word = tuple(word)
        out = self._cache.get(word)
        if out is None:
            out = np.arange(self.size)
            for e in reversed(word):
                out = self.generator_permutations[e][out]
            self._cache[word] = out
        return out

    def to_dict(self):
        return {"name": self.name, "points": list(self.points),
                "weights": [float(w) for w in self.weights],
                "permutations": {e: [int(x) for x in p]
                                 for e, p in self.generator_permutations.items()}}


def _parse_cycles(text, index):
    """One-line cycle notation such as ``(0 1 2)(3 4)``; ``()`` is the identity."""
    n = len(index)
    img = list(range(n))
    text = text.strip()
    if not re.fullmatch(r"(\([^()]*\))*", text.replace(" ", "")) and text:
        raise ActionError(f"bad cycle notation {text!r}")
    for cyc in re.findall(r"\(([^()]*)\)", text):
        items = cyc.replace(",", " ").split()
        try:
            pts = [index[x] for x in items]
        except KeyError as exc:
            raise ActionError(f"unknown point {exc} in cycle notation") from None
        if len(set(pts)) != len(pts):
            raise ActionError(f"repeated point in cycle ({cyc})")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            if img[a] != a and len(pts) > 1 and img[a] != b:
                raise ActionError(f"point {a} appears in two cycles")
            img[a] = b
    return img


def _as_permutation(spec, index, label):
    if isinstance(spec, str):
        img = _parse_cycles(spec, index)
    else:
        try:
            img = [index[x] if not isinstance(x, int) else x for x in spec]
        except KeyError as exc:
            raise ActionError(f"unknown point {exc} in the table of {label}") from None
    arr = np.asarray(img, dtype=np.int64)
    n = len(index)
    if arr.shape != (n,) or (arr < 0).any() or (arr >= n).any():
        raise ActionError(f"permutation of {label} has the wrong size or range")
    if len(np.unique(arr)) != n:
        raise ActionError(f"table of {label} is not bijective")
    return arr


def load_action(s, spec):
    """Validate an action of the group of scheme ``s`` on a finite probability space.

    ``spec`` is a dict (or a JSON path / string) with ``points`` (a count or a
    list of names), optional ``weights`` (uniform by default) and
    ``permutations`` mapping labels to image arrays or cycle notation.  Labels
    whose inverse is given may be omitted.
    """
    if isinstance(spec, str):
        if spec.lstrip().startswith("{"):
            spec = json.loads(spec)
        else:
            with open(spec, encoding="utf-8") as fh:
                spec = json.load(fh)
    extra = set(spec) - {"name", "scheme", "points", "weights", "permutations"}
    if extra:
        raise ActionError(f"unknown fields {sorted(extra)}")
    if spec.get("scheme") not in (None, s.name):
        raise ActionError(f"action is for scheme {spec['scheme']!r}, not {s.name!r}")
    pts = spec["points"]
    points = [str(i) for i in range(pts)] if isinstance(pts, int) else [str(p) for p in pts]
    if not points:
        raise ActionError("empty point set")
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    w = np.asarray(spec.get("weights", [1.0 / n] * n), dtype=np.float64)
    if w.shape != (n,) or (w < 0).any() or abs(w.sum() - 1) > 1e-12:
        raise ActionError("weights must be a probability vector on the points")

    given = spec.get("permutations", {})
    labels = list(s.labels)
    unknown = set(given) - set(labels)
    if unknown:
        raise ActionError(f"permutations for unknown labels {sorted(unknown)}")
    perms = {e: _as_permutation(p, index, e) for e, p in given.items()}
    for e in labels:
        ei = s.inv(e)
        if e in perms:
            continue
        if ei not in perms:
            raise ActionError(f"no permutation for {e} or its inverse")
        q = np.empty(n, dtype=np.int64)
        q[perms[ei]] = np.arange(n)
        perms[e] = q
    for e in labels:
        ei = s.inv(e)
        if not np.array_equal(perms[ei][perms[e]], np.arange(n)):
            if e == ei:
                raise ActionError(f"self-paired label {e} does not act as an involution")
            raise ActionError(f"permutations of {e} and {ei} are not inverse")
        if np.abs(w[perms[e]] - w).max() > 1e-12:
            raise ActionError(f"permutation of {e} does not preserve the weights")

    a = FiniteAction(s, points, w, perms, spec.get("name", ""))
    seen = set()
    for i in range(s.N):
        if s.corners[i] is None:
            continue
        rel = s.vertex_relator(i)
        if rel in seen:
            continue
        seen.add(rel)
        if not np.array_equal(a.word_permutation(rel), np.arange(n)):
            raise ActionError(f"vertex relator {''.join(rel)} (corner {i}) does not act trivially")
    return a


def trivial_action(s):
    return load_action(s, {"name": "trivial", "points": 1,
                           "permutations": {e: [0] for e in s.labels}})


def load_catalog_action(name, s=None):
    """An action shipped with the package, as a FiniteAction on its scheme."""
    from .scheme import load_catalog

    if name == "trivial":
        return trivial_action(s)
    try:
        text = resources.files("fuchsian_coding").joinpath("actions", f"{name}.json").read_text("utf-8")
    except FileNotFoundError:
        raise ActionError(f"no catalog action {name!r}") from None
    spec = json.loads(text)
    if s is None:
        s = load_catalog(spec["scheme"])
    return load_action(s, spec)


def catalog_actions_for(scheme_name):
    out = ["trivial"]
    for name in ACTIONS[1:]:
        text = resources.files("fuchsian_coding").joinpath("actions", f"{name}.json").read_text("utf-8")
        if json.loads(text)["scheme"] == scheme_name:
            out.append(name)
    return out


# -- the Markov system on Y ----------------------------------------------------

class MarkovSystem:
    """Coding, Parry data and an action of one scheme, with the operators P, U, P*."""

    def __init__(self, action, coding=None, parry=None, iota=None):
        s = action.scheme
        self.action = action
        self.coding = coding if coding is not None else build_coding(s)
        if self.coding.scheme.name != s.name:
            raise ActionError("coding and action belong to different schemes")
        self.parry = parry if parry is not None else parry_for(self.coding)
        self.iota = np.asarray(self.coding.involution if iota is None else iota)
        st = self.coding.states
        self.gamma_words = [gamma(s, j) for j in st]
        self.omega_words = [omega(s, j) for j in st]
        self.g = np.stack([action.word_permutation(w) for w in self.gamma_words])
        self.w = np.stack([action.word_permutation(w) for w in self.omega_words])
        self.g_inv = np.argsort(self.g, axis=1)
        p, ps = self.parry.transition_probabilities, self.parry.stationary
        self.p = p
        self.pstar = (ps[:, None] * p).T / ps[:, None]  # entry (j, k) = p_k p_{kj} / p_j
        self.start = np.asarray(self.coding.start_set)
        self.final = np.asarray(self.coding.final_set)

    @property
    def shape(self):
        return len(self.coding.states), self.action.size

    @property
    def dim(self):
        a, b = self.shape
        return a * b

    def weights(self):
        return np.outer(self.parry.stationary, self.action.weights)

    def inner(self, phi, psi):
        return float((self.weights() * phi * psi).sum())

    def random_field(self, rng, nonnegative=False):
        f = rng.random(self.shape)
        return f if nonnegative else 2 * f - 1

    # dense matrices

    def _check_dense(self):
        if self.dim > DENSE_CAP:
            raise ActionError(f"dense operators capped at dimension {DENSE_CAP}, got {self.dim}")

    def _dense(self, coef, perms):
        """Matrix of phi -> (sum_j coef_ij phi_j o perms_i)."""
        self._check_dense()
        S, m = self.shape
        out = np.zeros((S, m, S, m))
        xs = np.arange(m)
        for i in range(S):
            out[i][xs, :, perms[i]] = coef[i][None, :]
        return out.reshape(S * m, S * m)

    def dense_P(self):
        return self._dense(self.p, self.g)

    def dense_Pstar(self):
        # here the permutation follows the column state k
        self._check_dense()
        S, m = self.shape
        out = np.zeros((S, m, S, m))
        xs = np.arange(m)
        for k in range(S):
            out[:, xs, k, self.g_inv[k]] = self.pstar[:, k][:, None]
        return out.reshape(S * m, S * m)

    def dense_U(self):
        self._check_dense()
        S, m = self.shape
        out = np.zeros((S, m, S, m))
        xs = np.arange(m)
        for j in range(S):
            out[j, xs, self.iota[j], self.w[j]] = 1.0
        return out.reshape(S * m, S * m)

    def weighted_adjoint(self, mat):
        d = self.weights().ravel()
        return mat.T * d[None, :] / d[:, None]


def markov_system(action, coding=None, parry=None):
    return MarkovSystem(action, coding, parry)


def apply_P(a, f):
    """(P f)_i = sum_j p_ij T^{-1}_{gamma(i)} f_j."""
    mixed = a.p @ f
    return np.take_along_axis(mixed, a.g, axis=1)


def apply_U(a, f):
    """(U f)_j = T^{-1}_{omega(j)} f_{iota(j)}."""
    return np.take_along_axis(f[a.iota], a.w, axis=1)


def apply_Pstar(a, f):
    """(P* f)_j = sum_k (p_k p_kj / p_j) T_{gamma(k)} f_k."""
    moved = np.take_along_axis(f, a.g_inv, axis=1)
    return a.pstar @ moved


@dataclass
class IdentityReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c[1] for c in self.checks)

    def add(self, name, passed, deviation):
        self.checks.append((name, bool(passed), float(deviation)))

    def to_text(self):
        return "\n".join(f"{'PASS' if ok else 'FAIL'}  {name:<22} deviation {dev:.3e}"
                         for name, ok, dev in self.checks)


def check_adjoint_identities(a, tol=1e-12):
    """U = U^{-1} = U*, P* = UPU, Q = VW and Q* = WV as dense matrices."""
    P, U, Ps = a.dense_P(), a.dense_U(), a.dense_Pstar()
    eye = np.eye(a.dim)
    r = IdentityReport()
    r.add("U^2 = I", np.array_equal(U @ U, eye), np.abs(U @ U - eye).max())
    d = np.abs(a.weighted_adjoint(U) - U).max()
    r.add("U* = U", d <= tol, d)
    d = np.abs(a.weighted_adjoint(P) - Ps).max()
    r.add("P* = adjoint of P", d <= tol, d)
    d = np.abs(Ps - U @ P @ U).max()
    r.add("P* = UPU", d <= tol, d)
    Q, V, W = P @ P, P @ U, U @ P
    d = np.abs(Q - V @ W).max()
    r.add("Q = VW", d <= tol, d)
    d = np.abs(a.weighted_adjoint(Q) - W @ V).max()
    r.add("Q* = WV", d <= tol, d)
    return r


# -- spherical sums ------------------------------------------------------------

def spherical_sum_coded(a, f, n):
    """sum over |g| = n of f o T_g, computed as lambda^{n-1} sum_{j in Xi_S} h_j (P^{n-1} U phi)_j."""
    if n < 1:
        raise ActionError("n must be at least 1")
    f = np.asarray(f, dtype=np.float64)
    h, lam = a.parry.h, a.parry.lam
    phi = np.zeros(a.shape)
    phi[a.start] = f[None, :] / h[a.iota[a.start]][:, None]
    v = apply_U(a, phi)
    for _ in range(n - 1):
        v = apply_P(a, v)
    return lam ** (n - 1) * (h[a.start][:, None] * v[a.start]).sum(axis=0)


def spherical_sum_bruteforce(action, f, n, ball=None):
    """sum over oracle sphere words g of f o T_g."""
    from .oracle import MAX_RADIUS, cayley_ball, word_identifier

    s = action.scheme
    if ball is None:
        cap = MAX_RADIUS.get(s.name)
        if cap is not None and n > cap:
            raise ActionError(f"radius {n} beyond the oracle range {cap}")
        ball = cayley_ball(word_identifier(s.name), n)
    f = np.asarray(f, dtype=np.float64)
    out = np.zeros(action.size)
    for i in ball.sphere_indices(n):
        out += f[action.word_permutation(ball.word(i))]
    return out


def sphere_size(a, n):
    return a.coding.path_count(n)


# -- invariant sets and convergence --------------------------------------------

def g0_squared_orbits(action):
    """Orbit label of each point under the group generated by all products e1 e2."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    m = action.size
    labels = list(action.generator_permutations)
    rows, cols = [], []
    xs = np.arange(m)
    for e1 in labels:
        for e2 in labels:
            rows.append(xs)
            cols.append(action.word_permutation((e1, e2)))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    n, lab = connected_components(graph, directed=True, connection="weak")
    return n, lab


def conditional_expectation(action, f):
    """mu-weighted averages of f over the G_0^2 orbits."""
    action = getattr(action, "action", action)
    f = np.asarray(f, dtype=np.float64)
    n, lab = g0_squared_orbits(action)
    w = action.weights
    out = np.empty_like(f)
    for k in range(n):
        sel = lab == k
        tot = w[sel].sum()
        out[sel] = (w[sel] * f[sel]).sum() / tot if tot > 0 else f[sel].mean()
    return out


def operator_matrix(a, op, power):
    """Dense Q^power ("Q") or (Q*)^power Q^power ("QstarQ")."""
    P = a.dense_P()
    Q = P @ P
    Qn = np.linalg.matrix_power(Q, power)
    if op == "Q":
        return Qn
    if op == "QstarQ":
        Ps = a.dense_Pstar()
        return np.linalg.matrix_power(Ps @ Ps, power) @ Qn
    raise ActionError(f"unknown operator {op!r}")


def invariant_field_dimension(a, op="Q", power=1, tol=1e-9):
    """Dimension of the fixed space of the dense operator, in L^2(nu) coordinates."""
    M = operator_matrix(a, op, power)
    d = np.sqrt(a.weights().ravel())
    A = (M - np.eye(a.dim)) * d[:, None] / d[None, :]
    sv = np.linalg.svd(A, compute_uv=False)
    return int((sv <= tol).sum())


def second_eigenvalue_modulus(a):
    """Largest modulus among the eigenvalues of Q off the eigenvalue 1."""
    P = a.dense_P()
    ev = np.linalg.eigvals(P @ P)
    mods = np.sort(np.abs(ev))[::-1]
    k = invariant_field_dimension(a, "Q", 1)
    return float(mods[k]) if len(mods) > k else 0.0


@dataclass
class ConvergenceRow:
    radius: int
    sup_error: float
    l1_error: float
    sphere_size: int


def convergence_experiment(a, f, n_max):
    """Errors of the even spherical averages S_{2n}(f) against E(f | I_{G_0^2})."""
    f = np.asarray(f, dtype=np.float64)
    target = conditional_expectation(a.action, f)
    w = a.action.weights
    rows = []
    for n in range(1, n_max + 1):
        size = sphere_size(a, 2 * n)
        avg = spherical_sum_coded(a, f, 2 * n) / size
        err = np.abs(avg - target)
        rows.append(ConvergenceRow(2 * n, float(err.max()), float((w * err).sum()), size))
    return rows


def predicted_radius_index(rho, first_error, tol=1e-2):
    """Least n with first_error * rho^(n-1) <= tol: the spectral-gap extrapolation of row 1."""
    if first_error <= tol:
        return 1
    if rho <= 0:
        return 2
    if rho >= 1:
        return None
    return 1 + int(np.ceil(np.log(tol / first_error) / np.log(rho)))


def convergence_csv(rows):
    lines = ["n,sup_error,l1_error,sphere_size"]
    lines += [f"{r.radius},{r.sup_error:.6e},{r.l1_error:.6e},{r.sphere_size}" for r in rows]
    return "\n".join(lines) + "\n"
