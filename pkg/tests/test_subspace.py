import numpy as np
import pytest

from roma.data import DataMatrix, SubspaceBasis
from roma.errors import DimensionError, ValidationError
from roma.subspace import LRE_FLOOR, lre, recover_subspace
from roma.synth import ColumnStreams, random_subspace, sample_uniform_inliers


def planted_columns(n=40, r=6, count=80, seed=3):
    streams = ColumnStreams(seed)
    basis = random_subspace(n, r, streams.subspace())
    cols = sample_uniform_inliers(basis, count, streams)
    return basis, cols


def test_recover_auto_rank_exact():
    basis, cols = planted_columns()
    rec = recover_subspace(cols, np.arange(80))
    assert rec.rank == 6
    assert lre(basis, rec) <= -12.0


def test_recover_forced_rank():
    basis, cols = planted_columns()
    rec = recover_subspace(cols, np.arange(80), rank=4)
    assert rec.rank == 4
    # a strict sub-basis cannot capture the planted span
    assert lre(basis, rec) > -2.0


def test_recover_subset_of_columns():
    basis, cols = planted_columns(count=40)
    rec = recover_subspace(cols, np.arange(0, 40, 2))
    assert rec.rank == 6
    assert lre(basis, rec) <= -12.0


def test_recover_auto_rank_ignores_noise_below_tol():
    basis, cols = planted_columns()
    noisy = cols + 1e-12 * np.random.default_rng(0).standard_normal(cols.shape)
    rec = recover_subspace(noisy, np.arange(80))
    assert rec.rank == 6


def test_recover_noise_above_tol_inflates_rank():
    basis, cols = planted_columns()
    noisy = cols + 1e-4 * np.random.default_rng(0).standard_normal(cols.shape)
    rec = recover_subspace(noisy, np.arange(80))
    assert rec.rank > 6  # auto rank is for clean data; pass rank= when noisy
    forced = recover_subspace(noisy, np.arange(80), rank=6)
    assert lre(basis, forced) <= -3.0


def test_recover_validation():
    _, cols = planted_columns(count=10)
    with pytest.raises(ValidationError):
        recover_subspace(cols, [])
    with pytest.raises(ValidationError):
        recover_subspace(cols, [0, 10])
    with pytest.raises(ValidationError):
        recover_subspace(cols, [-1])
    with pytest.raises(ValidationError):
        recover_subspace(cols, [0, 1], rank=0)
    with pytest.raises(ValidationError):
        recover_subspace(cols, [0, 1], rank=3)  # more than the column count


def test_recover_accepts_datamatrix():
    basis, cols = planted_columns()
    rec = recover_subspace(DataMatrix(cols), np.arange(80))
    assert lre(basis, rec) <= -12.0


def test_lre_identical_basis_at_rounding_level():
    basis, _ = planted_columns()
    assert lre(basis, basis) <= -15.0  # pure rounding residual
    # an exactly representable basis projects with zero residual
    u = np.eye(10)[:, :3]
    assert lre(u, u) == LRE_FLOOR


def test_lre_orthogonal_estimate_is_zero():
    u = np.eye(10)[:, :3]
    v = np.eye(10)[:, 3:6]
    assert lre(u, v) == pytest.approx(0.0, abs=1e-15)


def test_lre_accepts_wrappers_and_arrays():
    basis, cols = planted_columns()
    rec = recover_subspace(cols, np.arange(80))
    assert lre(SubspaceBasis(basis), rec) == lre(basis, rec.values)


def test_lre_partial_overlap_in_between():
    u = np.eye(10)[:, :4]
    v = np.eye(10)[:, [0, 1, 7, 8]]   # shares a 2-dim slice of the span
    val = lre(u, v)
    # half the energy survives projection: log10(sqrt(2)/2)
    assert val == pytest.approx(np.log10(np.sqrt(0.5)), abs=1e-12)


def test_lre_validation():
    u = np.eye(8)[:, :3]
    with pytest.raises(ValidationError):
        lre(u, np.ones((8, 2)))
    with pytest.raises(DimensionError):
        lre(u, np.eye(9)[:, :3])
    with pytest.raises(DimensionError):
        lre(u, np.ones(8))


def test_recovery_cutoff_separates_success():
    # the -5 cutoff sits far from both the exact-recovery and the
    # wrong-subspace regimes
    basis, cols = planted_columns()
    good = recover_subspace(cols, np.arange(80))
    assert lre(basis, good) < -5.0
    bad = SubspaceBasis(np.linalg.qr(
        np.random.default_rng(9).standard_normal((40, 6)))[0])
    assert lre(basis, bad) > -5.0
