"""Perron-Frobenius data of the transition matrix and the Parry measure."""

from dataclasses import dataclass

import numpy as np


class ParryError(ValueError):
    pass


@dataclass
class ParryData:
    lam: float
    h: np.ndarray
    alpha: np.ndarray
    transition_probabilities: np.ndarray
    stationary: np.ndarray
    iterations: int = 0

    @property
    def lambda_(self):
        return self.lam

    def path_probability(self, path, initial=False):
        """Product of transition probabilities along ``path`` (state indices)."""
        p = self.transition_probabilities
        out = self.stationary[path[0]] if initial else 1.0
        for a, b in zip(path, path[1:]):
            out *= p[a, b]
        return out


def _power(m, tol, max_iter):
    v = np.ones(m.shape[0])
    for it in range(1, max_iter + 1):
        w = m @ v
        lam = w.max()
        if lam <= 0:
            raise ParryError("matrix annihilates the positive cone")
        w = w / lam
        res = np.abs(m @ w - lam * w).max() / lam
        if res <= tol:
            # polish: keep stepping while the residual still drops
            for _ in range(100):
                w2 = m @ w
                lam2 = w2.max()
                w2 = w2 / lam2
                res2 = np.abs(m @ w2 - lam2 * w2).max() / lam2
                if res2 >= res:
                    break
                w, lam, res = w2, lam2, res2
            return lam, w, it
        v = w
    raise ParryError(f"power iteration did not converge in {max_iter} steps")


def pf_eigendata(pi, tol=1e-12, max_iter=200000):
    """(lambda, h, alpha) with Pi h = lambda h, alpha Pi = lambda alpha, max(h) = 1, alpha.h = 1."""
    m = np.asarray(pi, dtype=np.float64)
    lam, h, it1 = _power(m, tol, max_iter)
    lam2, a, it2 = _power(m.T, tol, max_iter)
    # entries at the residual level are indistinguishable from zero
    if (h <= 10 * tol).any() or (a <= 10 * tol * a.max()).any():
        raise ParryError("PF eigenvector has nonpositive entries")
    h = h / h.max()
    a = a / (a @ h)
    lam = 0.5 * (lam + lam2)
    return lam, h, a, max(it1, it2)


def parry_chain(pi, eigendata=None):
    m = np.asarray(pi, dtype=np.float64)
    if eigendata is None:
        eigendata = pf_eigendata(m)
    lam, h, a = eigendata[:3]
    it = eigendata[3] if len(eigendata) > 3 else 0
    p = m * h[None, :] / (lam * h[:, None])
    return ParryData(lam, h, a, p, a * h, it)


def parry_for(coding):
    return parry_chain(coding.transition)


def parry_inv_deviation(pd, iota):
    """Largest deviation in p_{iota(j)} = p_j and p_{iota(j) iota(k)} = p_k p_{kj} / p_j."""
    iota = np.asarray(iota)
    ps, p = pd.stationary, pd.transition_probabilities
    d1 = np.abs(ps[iota] - ps).max()
    lhs = p[np.ix_(iota, iota)]
    rhs = (ps[:, None] * p / ps[None, :]).T  # entry (j, k) = p_k p_{kj} / p_j
    d2 = np.abs(lhs - rhs).max()
    return float(d1), float(d2)
