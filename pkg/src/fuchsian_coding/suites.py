"""Named verification suites, one per acceptance property, shared by the CLI and the tests."""

import time
from dataclasses import dataclass

import numpy as np

from . import coding as cd
from . import dynamics as dy
from . import oracle as orc
from . import parry as pa
from . import walker as wk
from .scheme import CATALOG, load_catalog

FREE, OCTAGON, TRIANGLE = CATALOG


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name:<16} {self.detail}  [{self.seconds:.2f}s]"


def _timed(name):
    def wrap(fn):
        def run(*args, **kw):
            t0 = time.perf_counter()
            ok, detail = fn(*args, **kw)
            return SuiteResult(name, bool(ok), detail, time.perf_counter() - t0)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


_CODINGS = {}


def coding_of(name):
    c = _CODINGS.get(name)
    if c is None:
        c = _CODINGS[name] = cd.build_coding(load_catalog(name))
    return c


@_timed("free")
def free_end_to_end(n_max=12):
    """4 states, coded counts 4*3^(n-1) equal to the oracle spheres, lambda = 3."""
    c = cd.build_coding(load_catalog(FREE))
    ball = orc.cayley_ball(orc.realize_group(FREE), n_max)
    oracle = ball.sphere_sizes()
    coded = [c.path_count(n) for n in range(1, n_max + 1)]
    expect = [4 * 3 ** (n - 1) for n in range(1, n_max + 1)]
    lam = pa.pf_eigendata(c.transition)[0]
    ok = len(c) == 4 and coded == expect == oracle[1:] and abs(lam - 3) <= 1e-12
    return ok, f"states={len(c)} counts n<=12 equal={coded == expect == oracle[1:]} |lambda-3|={abs(lam - 3):.1e}"


@_timed("sphere")
def octagon_sphere(n_counts=5, n_inject=4):
    """Coded counts equal oracle BFS counts; Phi injective with images at distance n."""
    s = load_catalog(OCTAGON)
    c = coding_of(OCTAGON)
    real = orc.realize_group(OCTAGON)
    ball = orc.cayley_ball(real, n_counts)
    oracle = ball.sphere_sizes()[1:]
    coded = [c.path_count(n) for n in range(1, n_counts + 1)]
    bad = 0
    for n in range(1, n_inject + 1):
        keys = set()
        paths = c.paths(n)
        for p in paths:
            k = real.key(wk.phi(s, [c.states[i] for i in p]))
            keys.add(k)
            if ball.dist_of_key(k) != n:
                bad += 1
        bad += len(paths) - len(keys)
    return coded == oracle and bad == 0, f"coded={coded} oracle={oracle} phi-defects={bad}"


@_timed("reversibility")
def reversibility():
    out = {name: cd.check_reversibility(coding_of(name)) for name in CATALOG}
    return all(out.values()), " ".join(f"{k}={v}" for k, v in out.items())


@_timed("connectivity")
def connectivity():
    parts, ok = [], True
    for name in CATALOG:
        c = coding_of(name)
        sc, per = cd.strongly_connected(c), cd.period(c)
        n = cd.positivity_index(c)
        ok = ok and sc and per == 1
        parts.append(f"{name}: sc={sc} period={per} N={n}")
    return ok, "; ".join(parts)


@_timed("parry")
def parry_identities(samples=1000, seed=0, tol=1e-12):
    """Path probabilities h_end / (lambda^len h_start) and the symmetry under iota."""
    rng = np.random.default_rng(seed)
    worst_path, worst_inv = 0.0, 0.0
    for name in CATALOG:
        c = coding_of(name)
        pd = pa.parry_for(c)
        worst_inv = max(worst_inv, *pa.parry_inv_deviation(pd, c.involution))
        n_states = len(c)
        for _ in range(samples):
            length = int(rng.integers(2, 12))
            path = [int(rng.integers(n_states))]
            for _ in range(length - 1):
                path.append(int(rng.choice(c.successors[path[-1]])))
            want = pd.h[path[-1]] / (pd.lam ** (length - 1) * pd.h[path[0]])
            got = pd.path_probability(path)
            worst_path = max(worst_path, abs(got - want) / want)
    ok = worst_path <= tol and worst_inv <= tol
    return ok, f"path rel.dev={worst_path:.1e} iota dev={worst_inv:.1e} ({samples} paths per scheme)"


def gamma_omega_defects(name):
    s = load_catalog(name)
    c = coding_of(name)
    if name == FREE:
        same = lambda u, v: wk.reduce_word(s, u) == wk.reduce_word(s, v)
    else:
        real = orc.word_identifier(name)
        same = lambda u, v: real.key(u) == real.key(v)
    inv = lambda w: wk.inverse_word(s, w)
    om = [wk.omega(s, st) for st in c.states]
    ga = [wk.gamma(s, st) for st in c.states]
    bad = 0
    for k, ik in enumerate(c.involution):
        if not same(om[ik], inv(om[k])):
            bad += 1
    checked = 0
    for k in range(len(c)):
        for j in c.successors[k]:
            checked += 1
            rhs = inv(om[j]) + inv(ga[c.involution[j]]) + om[k]
            if not same(ga[k], rhs):
                bad += 1
    return bad, checked


@_timed("gamma-omega")
def gamma_omega():
    parts, ok = [], True
    for name in (FREE, OCTAGON):
        bad, checked = gamma_omega_defects(name)
        ok = ok and bad == 0
        parts.append(f"{name}: {bad} defects over {checked} transitions")
    return ok, "; ".join(parts)


def actions_for(name):
    s = load_catalog(name)
    return [dy.load_catalog_action(a, s) for a in dy.catalog_actions_for(name)]


@_timed("operators")
def operator_identities():
    parts, ok = [], True
    for name in CATALOG:
        acts = [a for a in actions_for(name) if a.size > 1]
        worst = 0.0
        for a in acts:
            r = dy.check_adjoint_identities(dy.MarkovSystem(a, coding_of(name)))
            ok = ok and r.ok
            worst = max(worst, max(c[2] for c in r.checks))
        ok = ok and len(acts) >= 2
        parts.append(f"{name}: {len(acts)} actions, worst dev {worst:.1e}")
    return ok, "; ".join(parts)


@_timed("spherical-sum")
def spherical_sums(seed=0, tol=1e-8):
    rng = np.random.default_rng(seed)
    parts, ok = [], True
    for name, n_max in ((OCTAGON, 5), (FREE, 8)):
        ball = orc.cayley_ball(orc.realize_group(name), n_max)
        worst, exact = 0.0, True
        for a in actions_for(name):
            m = dy.MarkovSystem(a, coding_of(name))
            f_real = rng.random(a.size)
            f_int = rng.integers(-3, 4, a.size).astype(float)
            for n in range(1, n_max + 1):
                for f in (f_real, f_int):
                    coded = dy.spherical_sum_coded(m, f, n)
                    brute = dy.spherical_sum_bruteforce(a, f, n, ball)
                    worst = max(worst, np.abs(coded - brute).max())
                exact = exact and np.array_equal(np.rint(coded), brute)
        ok = ok and worst <= tol and exact
        parts.append(f"{name}: n<={n_max} max dev {worst:.1e}, integer f exact={exact}")
    return ok, "; ".join(parts)


@_timed("convexify")
def convexification(radius=4):
    """convexify(shortest path) == brute thickened path, and all shortest paths recovered.

    The oracle is G-equivariant, so pairs (hR, hgR) reduce to pairs (R, gR).
    """
    s = load_catalog(OCTAGON)
    real = orc.realize_group(OCTAGON)
    tess = wk.Tessellation(s, real.key)
    ball = orc.cayley_ball(real, radius)
    bad = npaths = 0
    for n in range(radius + 1):
        for i in ball.sphere_indices(n):
            w = ball.word(i)
            thick = orc.brute_thickened(real, ball, (), w).level_keys(tess)
            sps = orc.shortest_paths(real, ball, w)
            want = {tuple(real.key(ball.word(j)) for j in p) for p in sps}
            for p in sps:
                npaths += 1
                path = [wk.Domain(ball.word(j)) for j in p]
                try:
                    cv = wk.convexify(path, tess)
                    got = {tuple(tess.key(d) for d in q) for q in wk.shortest_paths_in(cv, tess)}
                    good = cv.level_keys(tess) == thick and got == want
                except wk.WalkerError:
                    good = False
                bad += not good
    return bad == 0, f"{npaths} shortest paths to {len(ball)} domains, {bad} mismatches"


def convergence_report(action_name=dy.ACTIONS[4], n_max=6, seed=0):
    a = dy.load_catalog_action(action_name)
    name = a.scheme.name
    m = dy.MarkovSystem(a, coding_of(name))
    rng = np.random.default_rng(seed)
    f = rng.random(a.size)
    f -= a.weights @ f
    rows = dy.convergence_experiment(m, f, n_max)
    rho = dy.second_eigenvalue_modulus(m)
    n_sup = dy.predicted_radius_index(rho, rows[0].sup_error)
    n_l1 = dy.predicted_radius_index(rho, rows[0].l1_error)
    orbits = dy.g0_squared_orbits(a)[0]
    big_n = cd.positivity_index(m.coding)
    dims = [dy.invariant_field_dimension(m, "Q", k) for k in (1, 2, 3)]
    dims.append(dy.invariant_field_dimension(m, "QstarQ", big_n))
    return dict(action=action_name, rows=rows, rho=rho, n_sup=n_sup, n_l1=n_l1,
                orbits=orbits, dims=dims, m=big_n)


@_timed("convergence")
def convergence(action_name=dy.ACTIONS[4], n_max=6, seed=0, tol=1e-2):
    r = convergence_report(action_name, n_max, seed)
    rows = r["rows"]
    ok_sup = r["n_sup"] is not None and all(x.sup_error < tol for x in rows[r["n_sup"] - 1:])
    ok_l1 = r["n_l1"] is not None and all(x.l1_error < tol for x in rows[r["n_l1"] - 1:])
    ok_dim = all(d == r["orbits"] for d in r["dims"])
    ok = ok_sup and ok_l1 and ok_dim and r["n_sup"] <= n_max and r["n_l1"] <= n_max
    return ok, (f"{r['action']}: rho={r['rho']:.4f} predicted 2n={2 * r['n_sup']} (sup) {2 * r['n_l1']} (L1), "
                f"sup errors {[f'{x.sup_error:.1e}' for x in rows]}, "
                f"fixed dims Q^1..3,(Q*)^mQ^m (m={r['m']}) = {r['dims']} vs {r['orbits']} orbit(s)")


SUITES = {
    "free": free_end_to_end,
    "sphere": octagon_sphere,
    "reversibility": reversibility,
    "connectivity": connectivity,
    "parry": parry_identities,
    "gamma-omega": gamma_omega,
    "operators": operator_identities,
    "spherical-sum": spherical_sums,
    "convexify": convexification,
    "convergence": convergence,
}

QUICK = ("free", "reversibility", "connectivity", "parry", "gamma-omega", "operators")


def run(names=None):
    names = list(SUITES) if names is None else names
    return [SUITES[n]() for n in names]
