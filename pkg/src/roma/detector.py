"""Parameter-free angle-based outlier identification.

Stage 1 (``roma``) normalizes the points, computes each point's nearest-
neighbor acute angle q_i, and flags points with q_i above the threshold as
outliers: a point whose closest companion is still nearly orthogonal cannot
share a low-dimensional subspace with anything.

Stage 2 (``roma_n``) handles outliers that cluster tightly enough to pass
stage 1.  Among stage-1 survivors it counts, for each point, how many
survivor angles exceed the threshold (na), picks the tightest pair's lower
index as the inlier head i* and the survivor farthest from it as the outlier
head o*, then assigns every survivor to whichever head has the closer na
count.  Ties go to the inlier side.  Stage-1 outliers stay outliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import (DEFAULT_BLOCK, DEFAULT_TABLE_CAP, AngleScores, acute_row,
                     acute_table_with_signs, blocked_na, blocked_q_and_mean,
                     count_above_threshold, fold_mean_theta, min_angle_scores,
                     min_pair)
from .data import DataMatrix, NormalizedMatrix, Partition, normalize_columns
from .errors import DegenerateRegimeError, ValidationError
from .threshold import MODES, ThresholdSpec, zeta_with_center
import math

__all__ = ["RomaResult", "RomaNResult", "roma", "roma_n"]

# Singular values below this fraction of the largest count as zero when
# ranking clusters for label disambiguation.
RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class RomaResult:
    partition: Partition
    scores: AngleScores
    threshold: ThresholdSpec


@dataclass(frozen=True, eq=False)
class RomaNResult:
    partition: Partition
    stage1: RomaResult
    survivors: np.ndarray
    na_survivors: np.ndarray
    inlier_head: int
    outlier_head: int
    labels_swapped: bool

    def __post_init__(self):
        for name in ("survivors", "na_survivors"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _normalized(m) -> NormalizedMatrix:
    x = m if isinstance(m, NormalizedMatrix) else normalize_columns(m)
    if x.n < 3:
        raise ValidationError(f"ambient dimension must be at least 3, got {x.n}")
    if x.num_points < 2:
        raise ValidationError(f"need at least 2 points, got {x.num_points}")
    return x


def roma(m, mode: str = "theoretical", *, table_cap: int = DEFAULT_TABLE_CAP,
         block_size: int = DEFAULT_BLOCK) -> RomaResult:
    """Stage-1 detection: outliers are points with q_i > zeta.

    Parameters
    ----------
    m : DataMatrix, NormalizedMatrix, or array of column points
    mode : "theoretical" (center pi/2) or "adapted" (center at the sample
        mean principal angle)

    Returns a RomaResult whose scores carry q, na at the threshold actually
    used, and the sample mean principal angle.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    x = _normalized(m)
    n_pts = x.num_points
    if n_pts <= table_cap:
        phi, neg = acute_table_with_signs(x.values)
        mean_theta = fold_mean_theta(phi, neg)
        center = mean_theta if mode == "adapted" else math.pi / 2.0
        spec = zeta_with_center(x.n, n_pts, center, mode)
        q = min_angle_scores(phi)
        na = count_above_threshold(phi, spec.zeta)
    else:
        q, mean_theta = blocked_q_and_mean(x.values, block_size)
        center = mean_theta if mode == "adapted" else math.pi / 2.0
        spec = zeta_with_center(x.n, n_pts, center, mode)
        na = blocked_na(x.values, spec.zeta, block_size)
    scores = AngleScores(q=q, na=na, mean_theta=mean_theta, zeta=spec.zeta)
    outliers = np.flatnonzero(scores.q > spec.zeta)
    inliers = np.flatnonzero(scores.q <= spec.zeta)
    partition = Partition(inliers=inliers, outliers=outliers, num_points=n_pts)
    return RomaResult(partition=partition, scores=scores, threshold=spec)


def _numerical_rank(cols: np.ndarray) -> int:
    centered = cols - cols.mean(axis=1, keepdims=True)
    s = np.linalg.svd(centered, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > RANK_TOL * s[0]).sum())


def roma_n(m, mode: str = "theoretical", *, rank_disambiguate: bool = False,
           table_cap: int = DEFAULT_TABLE_CAP,
           block_size: int = DEFAULT_BLOCK) -> RomaNResult:
    """Two-stage detection that also separates clustered outliers.

    ``rank_disambiguate`` enables an optional check that swaps the two
    stage-2 clusters when the nominal outlier cluster has the lower
    rank-to-size ratio (a tight subspace cluster looks more inlier-like than
    a full-rank one).  Off by default.
    """
    x = _normalized(m)
    stage1 = roma(x, mode, table_cap=table_cap, block_size=block_size)
    survivors = stage1.partition.inliers
    if survivors.size < 2:
        raise DegenerateRegimeError(
            f"stage 1 kept {survivors.size} point(s); stage 2 needs at least 2")
    zeta = stage1.threshold.zeta
    xs = NormalizedMatrix(x.values[:, survivors])
    ns = xs.num_points
    if ns <= table_cap:
        phi_s, _ = acute_table_with_signs(xs.values)
        na_s = count_above_threshold(phi_s, zeta)
        masked = phi_s.copy()
        np.fill_diagonal(masked, np.inf)
        flat = int(np.argmin(masked))
        i_local, j_local = flat // ns, flat % ns
        if j_local < i_local:
            i_local, j_local = j_local, i_local
        head_row = phi_s[i_local]
    else:
        na_s = blocked_na(xs.values, zeta, block_size)
        i_local, j_local = min_pair(xs.values, block_size)
        head_row = acute_row(xs.values, i_local)
    # Outlier head: survivor farthest from i*.  phi[i*, i*] = 0 can only
    # attain the max when every angle is zero, and the heads must differ, so
    # i* is excluded before the argmax.
    row = head_row.copy()
    row[i_local] = -np.inf
    o_local = int(np.argmax(row))
    dist_in = np.abs(na_s - na_s[i_local])
    dist_out = np.abs(na_s - na_s[o_local])
    to_outlier = dist_in > dist_out  # ties stay on the inlier side
    swapped = False
    if rank_disambiguate and to_outlier.any():
        in_cols = xs.values[:, ~to_outlier]
        out_cols = xs.values[:, to_outlier]
        ratio_in = _numerical_rank(in_cols) / in_cols.shape[1]
        ratio_out = _numerical_rank(out_cols) / out_cols.shape[1]
        if ratio_out < ratio_in:
            to_outlier = ~to_outlier
            swapped = True
    inliers = survivors[~to_outlier]
    outliers = np.concatenate([stage1.partition.outliers, survivors[to_outlier]])
    partition = Partition(inliers=inliers, outliers=outliers,
                          num_points=x.num_points)
    return RomaNResult(partition=partition, stage1=stage1, survivors=survivors,
                       na_survivors=na_s,
                       inlier_head=int(survivors[i_local]),
                       outlier_head=int(survivors[o_local]),
                       labels_swapped=swapped)
