"""Private variance oracles used by the unknown-covariance estimator.

All of them read the grid ``V[j, i]`` of per-group variance proxies; one
sample only ever touches one row of the grid, so each routine is private
with respect to changing one group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, HistogramBot, TooFewSamples
from .noise import NoiseSource
from .types import PrivacyBudget, validate_dataset


@dataclass(frozen=True, eq=False)
class VarianceEstimates:
    grid: np.ndarray
    ell: int

    @property
    def m(self) -> int:
        return self.grid.shape[0]

    @property
    def d(self) -> int:
        return self.grid.shape[1]


@dataclass(frozen=True)
class HistogramOutcome:
    """``found`` is False for the Bot outcome; ``bucket`` None means the zero bucket."""

    found: bool
    bucket: Optional[int] = None

    def decode(self) -> float:
        """4^b for a bucket, 0 for the zero bucket, HistogramBot for Bot."""
        if not self.found:
            raise HistogramBot("stable histogram released no bucket")
        return 0.0 if self.bucket is None else math.ldexp(1.0, 2 * self.bucket)


def group_variances(X_var, ell: int) -> VarianceEstimates:
    """V[j, i] = (1 / 2 ell) * sum_r (X[j, 2r-1, i] - X[j, 2r, i])^2 over m = n // (2 ell) groups."""
    rows = np.asarray(validate_dataset(X_var).rows)
    if ell < 1:
        raise ValueError("ell must be at least 1")
    m = rows.shape[0] // (2 * ell)
    if m == 0:
        raise TooFewSamples(f"need at least {2 * ell} samples for one group, got {rows.shape[0]}")
    groups = rows[: m * 2 * ell].reshape(m, ell, 2, rows.shape[1])
    diff = groups[:, :, 0, :] - groups[:, :, 1, :]
    grid = np.einsum("jri,jri->ji", diff, diff) / (2 * ell)
    return VarianceEstimates(grid, int(ell))


def is_valid(V: VarianceEstimates, Sigma_diag) -> bool:
    """Non-private check: at least 4m/5 groups are within a factor 2 on every coordinate."""
    s = np.asarray(Sigma_diag, dtype=float)
    if s.shape != (V.d,):
        raise DimensionMismatch(f"expected {V.d} variances, got shape {s.shape}")
    good = np.all((V.grid >= s / 2) & (V.grid <= 2 * s), axis=1)
    return int(np.count_nonzero(good)) * 5 >= 4 * V.m


def bucket_index(values) -> np.ndarray:
    """floor(log_4 x) for x > 0, computed exactly from the binary exponent.

    Zero maps to the sentinel ``np.iinfo(int64).min``.
    """
    x = np.asarray(values, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("bucket items must be finite and nonnegative")
    _, e = np.frexp(x)
    b = np.floor_divide(e.astype(np.int64) - 1, 2)
    return np.where(x == 0, np.iinfo(np.int64).min, b)


def stable_histogram(items, budget: PrivacyBudget, src: NoiseSource) -> HistogramOutcome:
    """Release the fullest base-4 bucket if its noisy count clears 1 + 2 log(1/delta)/eps.

    Only nonempty buckets get Laplace(2/eps) noise, drawn in increasing bucket
    order (zero bucket first). Ties go to the smallest bucket.
    """
    b = bucket_index(items)
    if b.size == 0:
        raise ValueError("stable_histogram needs at least one item")
    labels, counts = np.unique(b, return_counts=True)
    noisy = counts + np.asarray(src.laplace(2 / budget.epsilon, size=labels.size))
    tau = 1 + 2 * math.log(1 / budget.delta) / budget.epsilon
    best = int(np.argmax(noisy))
    if noisy[best] < tau:
        return HistogramOutcome(False)
    label = int(labels[best])
    return HistogramOutcome(True, None if label == np.iinfo(np.int64).min else label)


def sparse_scale(k: int, m: int, eps: float, delta: float) -> float:
    """Per-query Laplace scale sqrt(32 k log(1/delta) / (eps m))."""
    return math.sqrt(32 * k * math.log(1 / delta) / (eps * m))


def sparse_above_threshold(queries: Sequence[float], T: float, k: int, m: int, budget: PrivacyBudget,
                           src: NoiseSource) -> List[int]:
    """Indices (0-based) of queries whose noisy value clears a noisy threshold.

    ``m`` is the size of the database the sensitivity-1/m queries are
    evaluated on. Stops after ``k`` hits.
    """
    if k < 1 or m < 1:
        raise ValueError("need k >= 1 and m >= 1")
    eps = budget.epsilon
    t_hat = T + src.laplace(2 / (eps * m))
    sigma = sparse_scale(k, m, eps, budget.delta)
    hits = []
    for i, q in enumerate(queries):
        if q + src.laplace(sigma) >= t_hat:
            hits.append(i)
            if len(hits) >= k:
                break
    return hits


def kth_largest_per_group(V: VarianceEstimates, k: int) -> np.ndarray:
    if not 1 <= k <= V.d:
        raise ValueError(f"k must lie in [1, {V.d}], got {k}")
    return -np.partition(-V.grid, k - 1, axis=1)[:, k - 1]


def find_kth_largest_variance(V: VarianceEstimates, k: int, budget: PrivacyBudget, src: NoiseSource) -> float:
    """Private estimate of the k-th largest coordinate variance, as a power of 4."""
    return stable_histogram(kth_largest_per_group(V, k), budget, src).decode()


def variance_sum(V: VarianceEstimates, index_set, budget: PrivacyBudget, src: NoiseSource) -> float:
    """Private estimate of the summed variance over ``index_set`` (0-based), as a power of 4.

    An empty set returns 0 without touching the data or the noise source.
    """
    idx = np.asarray(sorted(set(int(i) for i in index_set)), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if idx[0] < 0 or idx[-1] >= V.d:
        raise DimensionMismatch(f"index set out of range for d={V.d}")
    return stable_histogram(V.grid[:, idx].sum(axis=1), budget, src).decode()


def top_var_queries(V: VarianceEstimates, R: float) -> np.ndarray:
    """Q_i = fraction of groups with V[j, i] >= R / 2."""
    return np.count_nonzero(V.grid >= R / 2, axis=0) / V.m


def top_var(V: VarianceEstimates, R: float, k: int, budget: PrivacyBudget, src: NoiseSource) -> List[int]:
    """Up to k coordinates (0-based) whose variance is likely at least R / 4."""
    if not 1 <= k <= V.d:
        raise ValueError(f"k must lie in [1, {V.d}], got {k}")
    if R < 0:
        raise ValueError("R must be nonnegative")
    return sparse_above_threshold(top_var_queries(V, R), 0.5, k, V.m, budget, src)


def topvar_min_groups(k: int, d: int, eps: float, delta: float, beta: float) -> int:
    """Groups needed for the sparse-vector accuracy margin to reach 1/4.

    Solves sqrt(128 k log(1/delta) / (eps m)) * (log d + log(2/beta)) <= 1/4 for m.
    """
    reach = math.log(max(d, 1)) + math.log(2 / beta)
    return math.ceil(16 * 128 * k * math.log(1 / delta) * reach**2 / eps)
