"""Independent reference implementations the tests check against.

Deliberately slow and simple: bisection instead of rational approximations,
quadrature instead of closed forms, brute-force loops instead of BLAS.
"""

import math

import numpy as np


def erfc_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bisect_quantile(p: float, lo: float = -40.0, hi: float = 40.0) -> float:
    """Invert erfc_cdf by pure bisection down to the last float."""
    if not 0.0 < p < 1.0:
        raise ValueError(p)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if erfc_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def quad_angle_mass(dim: int, lo: float, hi: float) -> float:
    """Integrate the inter-direction angle density over [lo, hi].

    Splits at pi/2 and substitutes u = theta - pi/2 so the quadrature sees
    the peak at an endpoint; scipy handles the rest.
    """
    from scipy.integrate import quad

    log_const = math.lgamma(dim / 2.0) - math.lgamma((dim - 1) / 2.0)
    const = math.exp(log_const) / math.sqrt(math.pi)
    half = math.pi / 2.0

    def f(u):  # density at half + u
        return const * math.cos(abs(u)) ** (dim - 2)

    total = 0.0
    for a, b in ((lo - half, min(hi, half) - half), (max(lo, half) - half, hi - half)):
        if b > a:
            val, _ = quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
            total += val
    return total


def brute_acute_angles(cols: np.ndarray) -> np.ndarray:
    """All pairwise acute angles via explicit loops, no Gram tricks."""
    cols = np.asarray(cols, dtype=float)
    n_pts = cols.shape[1]
    out = np.zeros((n_pts, n_pts))
    for i in range(n_pts):
        for j in range(n_pts):
            if i == j:
                continue
            xi = cols[:, i] / np.linalg.norm(cols[:, i])
            xj = cols[:, j] / np.linalg.norm(cols[:, j])
            c = abs(float(xi @ xj))
            out[i, j] = math.acos(min(c, 1.0))
    return out


def brute_min_scores(cols: np.ndarray) -> np.ndarray:
    table = brute_acute_angles(cols)
    np.fill_diagonal(table, np.inf)
    return table.min(axis=1)


def brute_na(cols: np.ndarray, zeta: float) -> np.ndarray:
    table = brute_acute_angles(cols)
    np.fill_diagonal(table, -np.inf)
    return (table > zeta).sum(axis=1)


def brute_mean_principal(cols: np.ndarray) -> float:
    """Mean principal angle (in [0, pi]) over unordered pairs."""
    cols = np.asarray(cols, dtype=float)
    n_pts = cols.shape[1]
    vals = []
    for i in range(n_pts):
        for j in range(i + 1, n_pts):
            xi = cols[:, i] / np.linalg.norm(cols[:, i])
            xj = cols[:, j] / np.linalg.norm(cols[:, j])
            c = float(xi @ xj)
            vals.append(math.acos(max(-1.0, min(c, 1.0))))
    return float(np.mean(vals))
