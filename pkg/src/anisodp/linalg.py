"""Powers and spectral summaries of symmetric PSD matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularForNegativePower
from .types import DIAGONAL, FULL, SPHERICAL, CovarianceModel, _frozen

# eigenvalues below EIG_FLOOR * op_norm count as zero for negative powers
EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralSummary:
    trace: float
    op_norm: float
    trace_sqrt: float
    d: int


def _eigh(M: CovarianceModel):
    w, U = np.linalg.eigh(np.asarray(M.payload))
    return np.clip(w, 0.0, None), U


def eigenvalues(M: CovarianceModel) -> np.ndarray:
    if M.kind == FULL:
        return _eigh(M)[0]
    return np.sort(M.diagonal())


def _power_values(values: np.ndarray, p: float) -> np.ndarray:
    values = np.clip(values, 0.0, None)
    if p < 0:
        top = float(np.max(values)) if values.size else 0.0
        if top <= 0 or np.any(values < EIG_FLOOR * top):
            raise SingularForNegativePower(
                f"matrix has an eigenvalue below {EIG_FLOOR:g} * op_norm; negative power {p} undefined"
            )
    if p == 0.5:
        return np.sqrt(values)
    if p == 0.25:
        return np.sqrt(np.sqrt(values))
    return values**p


def sym_psd_power(M: CovarianceModel, p: float) -> CovarianceModel:
    """Return M**p, keeping the representation of M.

    Full matrices go through one symmetric eigendecomposition; diagonal and
    spherical models are raised elementwise.
    """
    if M.kind == FULL:
        w, U = _eigh(M)
        out = (U * _power_values(w, p)) @ U.T
        return CovarianceModel(FULL, _frozen((out + out.T) / 2), M.d)
    if M.kind == DIAGONAL:
        return CovarianceModel(DIAGONAL, _frozen(_power_values(np.asarray(M.payload), p)), M.d)
    return CovarianceModel(SPHERICAL, _frozen(_power_values(np.atleast_1d(M.payload), p)[0]), M.d)


def spectral_summary(M: CovarianceModel) -> SpectralSummary:
    w = eigenvalues(M)
    return SpectralSummary(
        trace=float(np.sum(M.diagonal())),
        op_norm=float(np.max(w)),
        trace_sqrt=float(np.sum(np.sqrt(w))),
        d=M.d,
    )


def apply_rows(M: CovarianceModel, X: np.ndarray) -> np.ndarray:
    """Multiply every row of X by the symmetric matrix M, i.e. ``X @ M``."""
    X = np.asarray(X, dtype=float)
    if M.kind == FULL:
        return X @ M.payload
    if M.kind == DIAGONAL:
        return X * M.payload
    return X * float(M.payload)


def sandwich(P: CovarianceModel, S: CovarianceModel) -> CovarianceModel:
    """Return the symmetric product P S P."""
    if P.kind != FULL and S.kind != FULL:
        return CovarianceModel(DIAGONAL, _frozen(P.diagonal() ** 2 * S.diagonal()), P.d)
    left = apply_rows(P, S.dense())  # S P
    out = apply_rows(P, left.T)  # (S P)^T P = P S P
    return CovarianceModel(FULL, _frozen((out + out.T) / 2), P.d)


def floor_spectrum(M: CovarianceModel, rel: float) -> CovarianceModel:
    """Raise every eigenvalue of M to at least ``rel * op_norm``.

    Gives a strictly positive definite re-scaling matrix close to a
    near-singular covariance.
    """
    if not rel > EIG_FLOOR:
        raise ValueError(f"relative floor must exceed {EIG_FLOOR:g}, got {rel!r}")
    if M.kind == FULL:
        w, U = _eigh(M)
        out = (U * np.maximum(w, rel * w.max())) @ U.T
        return CovarianceModel(FULL, _frozen((out + out.T) / 2), M.d)
    if M.kind == DIAGONAL:
        v = np.asarray(M.payload)
        return CovarianceModel(DIAGONAL, _frozen(np.maximum(v, rel * v.max())), M.d)
    return M
