"""Re-scaled distance predicate and BasicFilter outlier removal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import apply_rows, sym_psd_power
from .noise import NoiseSource
from .types import CovarianceModel, Dataset, validate_dataset

# row block size for the pairwise pass; bounds memory at BLOCK * n floats
BLOCK = 1024


@dataclass(frozen=True)
class FilterParams:
    M_inv_quarter: CovarianceModel
    lam: float
    alpha_filter: float = 0.0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam!r}")
        if not 0 <= self.alpha_filter < 0.5:
            raise ValueError("alpha_filter must lie in [0, 1/2)")

    @classmethod
    def from_matrix(cls, M: CovarianceModel, lam: float) -> "FilterParams":
        return cls(sym_psd_power(M, -0.25), float(lam))


@dataclass(frozen=True, eq=False)
class CoreSelection:
    mask: np.ndarray

    @property
    def core_size(self) -> int:
        return int(np.count_nonzero(self.mask))


def _rescaled_norm(diff: np.ndarray, params: FilterParams) -> np.ndarray:
    return np.linalg.norm(apply_rows(params.M_inv_quarter, diff), axis=-1)


def dist_predicate(x, y, params: FilterParams) -> int:
    """1 iff ||M^{-1/4}(x - y)||_2 <= lambda."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape != (params.M_inv_quarter.d,):
        raise DimensionMismatch(f"vectors of shape {x.shape} and {y.shape} vs d={params.M_inv_quarter.d}")
    return int(_rescaled_norm(x - y, params) <= params.lam)


def _pair_blocks(rows: np.ndarray, params: FilterParams):
    """Yield (i0, j0, block) of predicate values for the upper block triangle j0 >= i0.

    The predicate is symmetric, so the lower triangle is the transpose.
    Squared distances come from a Gram product in the re-scaled frame; pairs
    whose value falls within rounding distance of lambda^2 are re-decided
    with the exact per-pair predicate so the result matches dist_predicate.
    """
    n = rows.shape[0]
    Y = apply_rows(params.M_inv_quarter, rows)
    Y = Y - Y.mean(axis=0)
    sq = np.einsum("ij,ij->i", Y, Y)
    lam2 = params.lam**2
    eps = np.finfo(float).eps
    slack_unit = 8 * eps * (Y.shape[1] + 8)
    for i0 in range(0, n, BLOCK):
        i1 = min(i0 + BLOCK, n)
        for j0 in range(i0, n, BLOCK):
            j1 = min(j0 + BLOCK, n)
            si, sj = sq[i0:i1, None], sq[None, j0:j1]
            d2 = si + sj - 2.0 * (Y[i0:i1] @ Y[j0:j1].T)
            slack = slack_unit * (si + sj + lam2) + 4 * eps * lam2
            block = d2 <= lam2
            unsure = np.abs(d2 - lam2) <= slack
            if np.any(unsure):
                jj, kk = np.nonzero(unsure)
                diffs = rows[i0 + jj] - rows[j0 + kk]
                block[jj, kk] = _rescaled_norm(diffs, params) <= params.lam
            if i0 == j0:
                np.fill_diagonal(block, True)
            yield i0, j0, block


def _check_dims(rows: np.ndarray, params: FilterParams) -> None:
    if rows.shape[1] != params.M_inv_quarter.d:
        raise DimensionMismatch(f"data has d={rows.shape[1]}, filter expects d={params.M_inv_quarter.d}")


def predicate_table(X, params: FilterParams) -> np.ndarray:
    """Full n x n Boolean table of dist_predicate over all ordered pairs."""
    rows = np.asarray(validate_dataset(X).rows)
    _check_dims(rows, params)
    out = np.empty((rows.shape[0], rows.shape[0]), dtype=bool)
    for i0, j0, block in _pair_blocks(rows, params):
        out[i0:i0 + block.shape[0], j0:j0 + block.shape[1]] = block
        out[j0:j0 + block.shape[1], i0:i0 + block.shape[0]] = block.T
    return out


def neighbor_counts(X, params: FilterParams) -> np.ndarray:
    """Number of k (self included) with predicate 1, for every row j."""
    rows = np.asarray(validate_dataset(X).rows)
    _check_dims(rows, params)
    counts = np.zeros(rows.shape[0], dtype=np.int64)
    for i0, j0, block in _pair_blocks(rows, params):
        counts[i0:i0 + block.shape[0]] += block.sum(axis=1)
        if j0 != i0:
            counts[j0:j0 + block.shape[1]] += block.sum(axis=0)
    return counts


def inclusion_probabilities(counts: np.ndarray, n: int, alpha: float = 0.0) -> np.ndarray:
    z = counts - n / 2
    top = (0.5 - alpha) * n
    return np.where(z <= 0, 0.0, np.where(z >= top, 1.0, z / top))


def basic_filter(X: Dataset, params: FilterParams, src: NoiseSource) -> CoreSelection:
    """Keep row j with probability p_j driven by how many rows are close to it."""
    X = validate_dataset(X)
    p = inclusion_probabilities(neighbor_counts(X, params), X.n, params.alpha_filter)
    return CoreSelection(np.asarray(src.bernoulli(p), dtype=bool))
