"""Closed-form operating characteristics of the angle threshold.

All quantities derive from the Gaussian surrogate for high-dimensional
angles.  The central one is

    p_inlier = 2 F(C_N sqrt((r-2)/(n-2))) - 1,

the probability that the acute angle between two inliers sharing an
r-dimensional subspace stays above the threshold; everything else (exact-
recovery impossibility, the nonempty-estimate bound, admissible ranks, the
count-separation guarantees for clustered outliers) is a function of it and
of the point counts.  Bounds are reported raw; they can leave [0, 1] in
parameter corners, which the report flags instead of silently clamping.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .statcore import normal_cdf
from .threshold import compute_cn

__all__ = [
    "p_inlier",
    "erp_impossibility_alpha",
    "nonempty_prob_lower_bound",
    "max_rank_sizable",
    "max_rank_sizable_noisy",
    "noise_shift_bound",
    "na_bound_prob",
    "structured_exact_prob",
    "sizable_cluster_gap_condition",
    "ErpTrialSummary",
    "ErpAlphaEstimate",
    "erp_alpha_estimate",
    "TheoryReport",
    "theory_report",
    "NOISE_SHIFT_BOTH_ENDS_FACTOR",
]

# ``noise_shift_bound`` follows the single-sided statement; a worst case with
# both endpoints of a pair perturbed doubles the shift.  Multiply by this
# factor to get the conservative two-sided version.
NOISE_SHIFT_BOTH_ENDS_FACTOR = 2.0


def _check_counts(n: int, r: int, num_points: int) -> tuple[int, int, int]:
    n, r, num_points = int(n), int(r), int(num_points)
    if n < 3:
        raise ValueError(f"ambient dimension must be at least 3, got {n}")
    if not 3 <= r <= n:
        raise ValueError(f"rank must lie in [3, n={n}], got {r}")
    if num_points < 2:
        raise ValueError(f"need at least 2 points, got {num_points}")
    return n, r, num_points


def p_inlier(n: int, r: int, num_points: int) -> float:
    """P(acute angle between two same-subspace inliers exceeds the threshold).

    Warns when r < 5, where the Gaussian surrogate for the in-subspace angle
    is a poor fit.
    """
    n, r, num_points = _check_counts(n, r, num_points)
    if r < 5:
        warnings.warn(f"Gaussian angle surrogate is inaccurate for rank {r} < 5",
                      stacklevel=2)
    c = compute_cn(num_points)
    return 2.0 * normal_cdf(c * math.sqrt((r - 2) / (n - 2))) - 1.0


def erp_impossibility_alpha(n: int, r: int, num_points: int, num_inliers: int) -> float:
    """Lower bound on P(some inlier is misflagged), (N_I-2)p^2 - (N_I-3)p.

    A positive value means exact recovery of the inlier set fails with at
    least that probability; negative values are vacuous and returned as-is.
    """
    num_inliers = int(num_inliers)
    if not 3 <= num_inliers <= num_points:
        raise ValueError(f"num_inliers must lie in [3, N], got {num_inliers}")
    p = p_inlier(n, r, num_points)
    return (num_inliers - 2) * p * p - (num_inliers - 3) * p


def nonempty_prob_lower_bound(n: int, r: int, num_points: int, num_inliers: int) -> float:
    """Lower bound on P(the inlier estimate is nonempty).

    Uses the sharper degree-two bound when its applicability conditions hold
    (with z = floor((N_I-2) p)):

        either floor((N_I-2)p + 1) = floor((N_I-1)p)
        or     p(2-p) >= floor(1 + (N_I-2)p) / (N_I-1)

    and falls back to 1 - p^2 otherwise.
    """
    num_inliers = int(num_inliers)
    if not 3 <= num_inliers <= num_points:
        raise ValueError(f"num_inliers must lie in [3, N], got {num_inliers}")
    p = p_inlier(n, r, num_points)
    ni = num_inliers
    z = math.floor((ni - 2) * p)
    cond1 = math.floor((ni - 2) * p + 1.0) == math.floor((ni - 1) * p)
    cond2 = p * (2.0 - p) >= math.floor(1.0 + (ni - 2) * p) / (ni - 1)
    if cond1 or cond2:
        upper = (((ni - 1) * (ni - 2) * p * p - z * (2.0 * p * (ni - 1) - (z + 1)))
                 / ((ni - z) * (ni - 1 - z)))
        return 1.0 - upper
    return 1.0 - p * p


def max_rank_sizable(n: int, num_points: int) -> float:
    """Largest subspace dimension keeping inlier angles mostly below zeta.

    Ranks up to 2(n-2)/(pi C_N^2) + 2 leave the expected in-subspace angle
    under the threshold; the return value is the real-valued cap (compare
    r <= value).
    """
    n = int(n)
    if n < 3:
        raise ValueError(f"ambient dimension must be at least 3, got {n}")
    c = compute_cn(num_points)
    return 2.0 * (n - 2) / (math.pi * c * c) + 2.0


def noise_shift_bound(snr: float) -> float:
    """Expected worst-case angle perturbation arccos(1 - 1/(2 sqrt(snr))).

    ``snr`` is the per-point signal-to-noise ratio ||m||^2 / E||e||^2, at
    least 1/4 so the arccos argument stays within [0, 1].  See
    NOISE_SHIFT_BOTH_ENDS_FACTOR for the two-sided worst case.
    """
    snr = float(snr)
    if snr < 0.25:
        raise ValueError(f"snr must be at least 1/4, got {snr!r}")
    return math.acos(1.0 - 1.0 / (2.0 * math.sqrt(snr)))


def max_rank_sizable_noisy(n: int, num_points: int, snr: float) -> float:
    """Noisy version of ``max_rank_sizable``; requires snr > 1/4."""
    n = int(n)
    if n < 3:
        raise ValueError(f"ambient dimension must be at least 3, got {n}")
    snr = float(snr)
    if snr <= 0.25:
        raise ValueError(f"snr must exceed 1/4, got {snr!r}")
    c = compute_cn(num_points)
    shifted = c + math.sqrt(n - 2) * noise_shift_bound(snr)
    return 2.0 * (n - 2) / (math.pi * shifted * shifted) + 2.0


def _check_split(num_points: int, num_inliers: int, num_structured: int) -> tuple[int, int, int]:
    num_points, num_inliers, num_structured = int(num_points), int(num_inliers), int(num_structured)
    if num_points < 2:
        raise ValueError(f"need at least 2 points, got {num_points}")
    if num_inliers < 1 or num_structured < 1:
        raise ValueError("both point counts must be positive")
    if num_inliers + num_structured > num_points:
        raise ValueError(
            f"{num_inliers} inliers + {num_structured} structured outliers exceed N={num_points}")
    return num_points, num_inliers, num_structured


def na_bound_prob(num_points: int, num_inliers: int, num_structured: int) -> float:
    """P(each na count clears its side's floor), 1 - N_Os N_I / (N^2 (N-1)).

    With probability at least this, every structured outlier has na >= N_I
    and every inlier has na >= N_Os.
    """
    n_pts, ni, nos = _check_split(num_points, num_inliers, num_structured)
    return 1.0 - nos * ni / (float(n_pts) ** 2 * (n_pts - 1))


def structured_exact_prob(num_points: int, num_inliers: int, num_structured: int) -> float:
    """P(count-based clustering separates the two groups exactly) when all
    outliers are structured: 1 - 2 N_Os N_I / (N^2 (N-1))."""
    n_pts, ni, nos = _check_split(num_points, num_inliers, num_structured)
    return 1.0 - 2.0 * nos * ni / (float(n_pts) ** 2 * (n_pts - 1))


def sizable_cluster_gap_condition(n: int, r: int, num_points: int,
                                  num_inliers: int, num_structured: int) -> bool:
    """Whether the na gap N_I - N_Os > 2 (N_I - 1) p_inlier holds.

    Requires more inliers than structured outliers; raises otherwise.
    """
    _, ni, nos = _check_split(num_points, num_inliers, num_structured)
    if ni <= nos:
        raise ValueError(
            f"gap condition needs num_inliers > num_structured, got {ni} <= {nos}")
    p = p_inlier(n, r, num_points)
    return (ni - nos) > 2.0 * (ni - 1) * p


@dataclass(frozen=True)
class ErpTrialSummary:
    """Monte Carlo inputs for the exact-recovery failure estimate.

    ``all_inliers_recovered`` holds one flag per trial; the exceedance pair
    pools, across trials, how many true inliers scored q above the threshold
    out of how many were seen.
    """

    all_inliers_recovered: tuple[bool, ...]
    inlier_exceed_count: int
    inlier_total: int
    num_inliers: int

    def __post_init__(self):
        if len(self.all_inliers_recovered) == 0:
            raise ValueError("need at least one trial")
        if not 0 <= self.inlier_exceed_count <= self.inlier_total:
            raise ValueError("exceedance count must lie within the total")
        if self.inlier_total < 1 or self.num_inliers < 1:
            raise ValueError("totals must be positive")


@dataclass(frozen=True)
class ErpAlphaEstimate:
    union_alpha: float      # N_I * P_hat(q_inlier > zeta), the union-bound rate
    empirical_alpha: float  # observed fraction of trials missing an inlier
    trials: int


def erp_alpha_estimate(summary: ErpTrialSummary) -> ErpAlphaEstimate:
    """Union-bound failure rate alongside the directly observed one."""
    rate = summary.inlier_exceed_count / summary.inlier_total
    recovered = np.asarray(summary.all_inliers_recovered, dtype=bool)
    return ErpAlphaEstimate(
        union_alpha=summary.num_inliers * rate,
        empirical_alpha=float(1.0 - recovered.mean()),
        trials=recovered.size,
    )


@dataclass(frozen=True)
class TheoryReport:
    """Bundle of the closed-form quantities for one parameter point.

    Probability-typed fields are clamped to [0, 1]; ``raw`` keeps the
    unclamped formula outputs and ``notes`` records which fields were out of
    range or otherwise caveated.
    """

    n: int
    rank: int
    num_points: int
    num_inliers: int
    num_structured: int | None
    snr: float | None
    p_inlier: float
    oip_alpha: float
    erp_alpha_lower: float
    nonempty_prob: float
    max_rank: float
    max_rank_noisy: float | None
    noise_shift: float | None
    na_prob: float | None
    exact_prob: float | None
    gap_condition: bool | None
    raw: dict = field(default_factory=dict)
    notes: tuple = ()


def _clamp(name: str, value: float, raw: dict, notes: list) -> float:
    raw[name] = value
    if value < 0.0 or value > 1.0:
        notes.append(f"{name} formula value {value:.4g} outside [0, 1]; clamped")
        return min(max(value, 0.0), 1.0)
    return value


def theory_report(n: int, rank: int, num_points: int, num_inliers: int,
                  num_structured: int | None = None,
                  snr: float | None = None) -> TheoryReport:
    """Evaluate every bound that applies to the given parameter point."""
    raw: dict = {}
    notes: list = []
    p = p_inlier(n, rank, num_points)
    erp_lower = erp_impossibility_alpha(n, rank, num_points, num_inliers)
    raw["erp_alpha_lower"] = erp_lower
    if erp_lower < 0.0:
        notes.append("erp_alpha_lower is negative: the impossibility bound is vacuous here")
    nonempty = _clamp("nonempty_prob",
                      nonempty_prob_lower_bound(n, rank, num_points, num_inliers),
                      raw, notes)
    max_rank_noisy = noise_shift = None
    if snr is not None:
        max_rank_noisy = max_rank_sizable_noisy(n, num_points, snr)
        noise_shift = noise_shift_bound(snr)
        notes.append("noise_shift follows the single-sided statement; "
                     f"multiply by {NOISE_SHIFT_BOTH_ENDS_FACTOR:g} for the "
                     "two-sided worst case")
    na_prob = exact_prob = None
    gap = None
    if num_structured is not None:
        na_prob = _clamp("na_prob",
                         na_bound_prob(num_points, num_inliers, num_structured),
                         raw, notes)
        exact_prob = _clamp("exact_prob",
                            structured_exact_prob(num_points, num_inliers, num_structured),
                            raw, notes)
        if num_inliers > num_structured:
            gap = sizable_cluster_gap_condition(n, rank, num_points,
                                                num_inliers, num_structured)
        else:
            notes.append("gap condition undefined: num_inliers <= num_structured")
    return TheoryReport(
        n=int(n), rank=int(rank), num_points=int(num_points),
        num_inliers=int(num_inliers),
        num_structured=None if num_structured is None else int(num_structured),
        snr=snr,
        p_inlier=p,
        oip_alpha=1.0 / int(num_points),
        erp_alpha_lower=erp_lower,
        nonempty_prob=nonempty,
        max_rank=max_rank_sizable(n, num_points),
        max_rank_noisy=max_rank_noisy,
        noise_shift=noise_shift,
        na_prob=na_prob,
        exact_prob=exact_prob,
        gap_condition=gap,
        raw=raw,
        notes=tuple(notes),
    )
