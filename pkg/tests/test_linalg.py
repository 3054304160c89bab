import numpy as np
import pytest

from anisodp.errors import SingularForNegativePower
from anisodp.linalg import floor_spectrum, sandwich, spectral_summary, sym_psd_power
from anisodp.types import FULL, CovarianceModel, validate_covariance


@pytest.mark.parametrize("p", [0.5, -0.5, 0.25, -0.25])
def test_identity_powers(p):
    for M in (CovarianceModel.identity(3), validate_covariance(np.eye(3)), CovarianceModel.from_variances(np.ones(3))):
        np.testing.assert_allclose(sym_psd_power(M, p).dense(), np.eye(3), atol=1e-14)


def test_diag_negative_quarter():
    R = sym_psd_power(CovarianceModel.from_variances([16.0, 81.0]), -0.25)
    np.testing.assert_allclose(R.diagonal(), [0.5, 1 / 3], rtol=1e-15)


def test_full_square_root_remultiplies():
    M = validate_covariance([[2.0, 1.0], [1.0, 2.0]])
    R = sym_psd_power(M, 0.5).dense()
    assert np.linalg.norm(R @ R - M.dense(), 2) <= 1e-9


def test_spectral_summaries():
    s = spectral_summary(CovarianceModel.from_variances([16.0, 81.0]))
    assert (s.trace, s.op_norm, s.trace_sqrt) == (97.0, 81.0, 13.0)
    s = spectral_summary(CovarianceModel.identity(5))
    assert (s.trace, s.op_norm, s.trace_sqrt) == (5.0, 1.0, 5.0)
    s = spectral_summary(validate_covariance([[2.0, 1.0], [1.0, 2.0]]))
    assert s.trace == pytest.approx(4) and s.op_norm == pytest.approx(3)
    assert s.trace_sqrt == pytest.approx(1 + np.sqrt(3), rel=1e-12)


def test_singular_negative_power():
    with pytest.raises(SingularForNegativePower):
        sym_psd_power(CovarianceModel.from_variances([1.0, 0.0]), -0.25)
    with pytest.raises(SingularForNegativePower):
        sym_psd_power(validate_covariance([[1.0, 1.0], [1.0, 1.0]]), -0.5)
    # positive powers of singular matrices are fine
    np.testing.assert_allclose(sym_psd_power(CovarianceModel.from_variances([4.0, 0.0]), 0.5).diagonal(), [2, 0])


def test_diagonal_matches_full_path():
    v = np.array([3.0, 0.5, 2.0, 1e-3])
    D = CovarianceModel.from_variances(v)
    F = validate_covariance(np.diag(v))
    for p in (0.5, -0.5, 0.25, -0.25):
        np.testing.assert_allclose(sym_psd_power(D, p).dense(), sym_psd_power(F, p).dense(), atol=1e-10)


def test_sandwich_diagonal_and_full():
    P = CovarianceModel.from_variances([2.0, 3.0])
    S = validate_covariance([[1.0, 0.5], [0.5, 1.0]])
    out = sandwich(P, S)
    assert out.kind == FULL
    np.testing.assert_allclose(out.dense(), np.diag([2, 3]) @ S.dense() @ np.diag([2, 3]))
    out = sandwich(P, CovarianceModel.identity(2))
    np.testing.assert_allclose(out.diagonal(), [4, 9])


def test_floor_spectrum():
    M = CovarianceModel.from_variances([1.0, 1e-20])
    np.testing.assert_allclose(floor_spectrum(M, 1e-10).diagonal(), [1.0, 1e-10])
    sym_psd_power(floor_spectrum(M, 1e-10), -0.25)
    F = floor_spectrum(validate_covariance([[1.0, 1.0], [1.0, 1.0]]), 1e-6)
    assert np.linalg.eigvalsh(F.dense()).min() == pytest.approx(2e-6)
