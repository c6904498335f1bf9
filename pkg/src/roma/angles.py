"""Pairwise-angle kernels.

The Gram matrix of unit columns drives everything: principal angles are
arccos of its entries clamped to [-1, 1], acute angles use the absolute
value.  For N points this is O(N^2 n) work; the full N x N table is
materialized only up to ``DEFAULT_TABLE_CAP`` points, above which row-block
streaming computes the same reductions without the quadratic memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import NormalizedMatrix, normalize_columns
from .errors import DimensionError, ValidationError

__all__ = [
    "DEFAULT_TABLE_CAP",
    "DEFAULT_BLOCK",
    "AngleScores",
    "pairwise_acute_angles",
    "pairwise_principal_angles",
    "acute_table_with_signs",
    "min_angle_scores",
    "count_above_threshold",
    "mean_principal_angle",
    "fold_mean_theta",
    "blocked_q_and_mean",
    "blocked_na",
    "min_pair",
    "acute_row",
    "angle_scores",
]

DEFAULT_TABLE_CAP = 20000
DEFAULT_BLOCK = 2048

_HALF_PI = math.pi / 2.0


def _values(x) -> np.ndarray:
    if isinstance(x, NormalizedMatrix):
        return x.values
    if hasattr(x, "values"):
        return normalize_columns(x).values
    return NormalizedMatrix(np.asarray(x, dtype=float)).values


def _sym_gram(v: np.ndarray) -> np.ndarray:
    g = v.T @ v
    # gemm does not guarantee bitwise symmetry; averaging restores it exactly.
    g += g.T
    g *= 0.5
    return g


def pairwise_acute_angles(x) -> np.ndarray:
    """Symmetric table of acute angles arccos(|x_i . x_j|), zero diagonal."""
    v = _values(x)
    g = np.abs(_sym_gram(v))
    np.clip(g, 0.0, 1.0, out=g)
    phi = np.arccos(g)
    np.fill_diagonal(phi, 0.0)
    return phi


def pairwise_principal_angles(x) -> np.ndarray:
    """Symmetric table of principal angles arccos(x_i . x_j) in [0, pi]."""
    v = _values(x)
    g = _sym_gram(v)
    np.clip(g, -1.0, 1.0, out=g)
    theta = np.arccos(g)
    np.fill_diagonal(theta, 0.0)
    return theta


def acute_table_with_signs(x) -> tuple[np.ndarray, np.ndarray]:
    """Acute-angle table plus the mask of negative Gram entries.

    The mask lets callers reconstruct principal angles as pi - phi where the
    inner product was negative, without a second arccos pass.
    """
    v = _values(x)
    g = _sym_gram(v)
    neg = g < 0.0
    np.abs(g, out=g)
    np.clip(g, 0.0, 1.0, out=g)
    phi = np.arccos(g)
    np.fill_diagonal(phi, 0.0)
    np.fill_diagonal(neg, False)
    return phi, neg


def min_angle_scores(phi: np.ndarray) -> np.ndarray:
    """Per-point nearest-neighbor angle q_i = min_{j != i} phi_ij."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise DimensionError("angle table must be square")
    if phi.shape[0] < 2:
        raise ValidationError("need at least 2 points for nearest-neighbor angles")
    masked = phi.copy()
    np.fill_diagonal(masked, np.inf)
    return masked.min(axis=1)


def count_above_threshold(phi: np.ndarray, zeta: float) -> np.ndarray:
    """na_i = #{j : phi_ij > zeta}, strict; ties at zeta do not count."""
    zeta = float(zeta)
    if not (0.0 < zeta < _HALF_PI):
        raise ValueError(f"threshold must lie in (0, pi/2), got {zeta!r}")
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise DimensionError("angle table must be square")
    # The diagonal is zero, so the self term can never count.
    return (phi > zeta).sum(axis=1).astype(np.int64)


def mean_principal_angle(theta: np.ndarray) -> float:
    """Sample mean of theta_ij over unordered pairs i < j."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise DimensionError("angle table must be square")
    n = theta.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 points for a mean angle")
    # Symmetric with zero diagonal: full sum = 2 * pair sum.  np.sum uses
    # pairwise accumulation, keeping cross-run drift below 1e-12.
    return float(theta.sum() / (n * (n - 1)))


def fold_mean_theta(phi: np.ndarray, neg: np.ndarray) -> float:
    """Mean principal angle recovered from the acute table and sign mask."""
    n = phi.shape[0]
    if n < 2:
        raise ValidationError("need at least 2 points for a mean angle")
    total = phi.sum() + math.pi * neg.sum() - 2.0 * phi[neg].sum()
    return float(total / (n * (n - 1)))


def _row_block(v: np.ndarray, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    g = v[:, start:stop].T @ v
    neg = g < 0.0
    np.abs(g, out=g)
    np.clip(g, 0.0, 1.0, out=g)
    phi = np.arccos(g)
    idx = np.arange(start, stop)
    phi[idx - start, idx] = 0.0
    neg[idx - start, idx] = False
    return phi, neg


def blocked_q_and_mean(x, block_size: int = DEFAULT_BLOCK) -> tuple[np.ndarray, float]:
    """Streaming q_i and mean principal angle; never builds the N x N table."""
    v = _values(x)
    n_pts = v.shape[1]
    if n_pts < 2:
        raise ValidationError("need at least 2 points")
    q = np.empty(n_pts)
    total = 0.0
    for start in range(0, n_pts, block_size):
        stop = min(start + block_size, n_pts)
        phi, neg = _row_block(v, start, stop)
        total += phi.sum() + math.pi * neg.sum() - 2.0 * phi[neg].sum()
        idx = np.arange(start, stop)
        phi[idx - start, idx] = np.inf
        q[start:stop] = phi.min(axis=1)
    return q, float(total / (n_pts * (n_pts - 1)))


def blocked_na(x, zeta: float, block_size: int = DEFAULT_BLOCK) -> np.ndarray:
    """Streaming na_i counts at threshold zeta."""
    zeta = float(zeta)
    if not (0.0 < zeta < _HALF_PI):
        raise ValueError(f"threshold must lie in (0, pi/2), got {zeta!r}")
    v = _values(x)
    n_pts = v.shape[1]
    na = np.empty(n_pts, dtype=np.int64)
    for start in range(0, n_pts, block_size):
        stop = min(start + block_size, n_pts)
        phi, _ = _row_block(v, start, stop)
        na[start:stop] = (phi > zeta).sum(axis=1)
    return na


def min_pair(x, block_size: int = DEFAULT_BLOCK) -> tuple[int, int]:
    """Indices (i, j), i < j, of the globally smallest acute angle.

    Ties resolve to the first pair in row-major order, i.e. smallest i then
    smallest j.
    """
    v = _values(x)
    n_pts = v.shape[1]
    if n_pts < 2:
        raise ValidationError("need at least 2 points")
    best = np.inf
    best_pair = (0, 1)
    for start in range(0, n_pts, block_size):
        stop = min(start + block_size, n_pts)
        phi, _ = _row_block(v, start, stop)
        idx = np.arange(start, stop)
        phi[idx - start, idx] = np.inf
        flat = int(np.argmin(phi))
        value = phi.flat[flat]
        if value < best:
            best = value
            best_pair = (start + flat // n_pts, flat % n_pts)
    i, j = best_pair
    return (i, j) if i < j else (j, i)


def acute_row(x, i: int) -> np.ndarray:
    """Acute angles from point i to every point; entry i is zero."""
    v = _values(x)
    if not 0 <= i < v.shape[1]:
        raise ValidationError(f"point index {i} out of range")
    dots = np.abs(v[:, i] @ v)
    np.clip(dots, 0.0, 1.0, out=dots)
    row = np.arccos(dots)
    row[i] = 0.0
    return row


@dataclass(frozen=True, eq=False)
class AngleScores:
    """Per-point angle statistics at a fixed threshold.

    q is the nearest-neighbor acute angle, na counts acute angles strictly
    above ``zeta``, and mean_theta is the sample mean principal angle over
    unordered pairs (informational; it feeds the adapted threshold).
    """

    q: np.ndarray
    na: np.ndarray
    mean_theta: float
    zeta: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        na = np.asarray(self.na, dtype=np.int64)
        if q.shape != na.shape or q.ndim != 1:
            raise DimensionError("q and na must be 1-d arrays of equal length")
        q.setflags(write=False)
        na.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "na", na)


def angle_scores(x, zeta: float, table_cap: int = DEFAULT_TABLE_CAP,
                 block_size: int = DEFAULT_BLOCK) -> AngleScores:
    """Compute q, na, and the mean principal angle at a known threshold.

    Materializes the full angle table when the point count stays within
    ``table_cap`` and streams row blocks otherwise; both routes return the
    same scores.
    """
    v = _values(x)
    n_pts = v.shape[1]
    if n_pts <= table_cap:
        phi, neg = acute_table_with_signs(v)
        q = min_angle_scores(phi)
        na = count_above_threshold(phi, zeta)
        mean_theta = fold_mean_theta(phi, neg)
    else:
        q, mean_theta = blocked_q_and_mean(v, block_size)
        na = blocked_na(v, zeta, block_size)
    return AngleScores(q=q, na=na, mean_theta=mean_theta, zeta=float(zeta))
