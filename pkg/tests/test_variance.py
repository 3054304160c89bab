import math

import numpy as np
import pytest

from anisodp.errors import HistogramBot, TooFewSamples
from anisodp.noise import NoiseSource, ZeroNoise
from anisodp.synth import sample_variance_estimates
from anisodp.types import PrivacyBudget
from anisodp.variance import (
    HistogramOutcome,
    VarianceEstimates,
    bucket_index,
    find_kth_largest_variance,
    group_variances,
    is_valid,
    sparse_above_threshold,
    sparse_scale,
    stable_histogram,
    top_var,
    top_var_queries,
    variance_sum,
)

B = PrivacyBudget(1.0, 0.1)


def grid(rows, m=10):
    return VarianceEstimates(np.tile(np.asarray(rows, dtype=float), (m, 1)), 1)


def test_group_variances_examples():
    assert group_variances(np.array([[3.0], [1.0]]), 1).grid.tolist() == [[2.0]]
    assert group_variances(np.array([[1.0], [3.0], [5.0], [1.0]]), 2).grid.tolist() == [[5.0]]
    assert not group_variances(np.ones((8, 3)), 2).grid.any()


def test_group_variances_drops_remainder():
    V = group_variances(np.arange(10.0).reshape(10, 1), 2)
    assert V.m == 2


def test_group_variances_too_few():
    with pytest.raises(TooFewSamples):
        group_variances(np.ones((3, 2)), 2)


def test_is_valid_examples():
    s = np.array([1.0, 2.0])
    assert is_valid(grid(s), s)
    assert not is_valid(grid([3.0, 2.0]), s)
    assert is_valid(grid([0.0, 2.0]), np.array([0.0, 2.0]))


def test_is_valid_four_fifths():
    s = np.array([1.0])
    g = np.ones((10, 1))
    g[:2] = 5.0
    assert is_valid(VarianceEstimates(g, 1), s)
    g[:3] = 5.0
    assert not is_valid(VarianceEstimates(g, 1), s)


def test_bucket_index_boundaries():
    x = np.array([1.0, 3.999, 4.0, 15.99, 16.0, 0.25, 0.2499, 5.0])
    np.testing.assert_array_equal(bucket_index(x), [0, 0, 1, 1, 2, -1, -2, 1])
    assert bucket_index(np.array([0.0]))[0] == np.iinfo(np.int64).min


def test_stable_histogram_examples(zero):
    assert stable_histogram(np.full(10, 5.0), B, zero) == HistogramOutcome(True, 1)
    assert stable_histogram(np.full(3, 5.0), B, zero) == HistogramOutcome(False)
    assert stable_histogram(np.zeros(10), B, zero).decode() == 0.0
    with pytest.raises(HistogramBot):
        HistogramOutcome(False).decode()


def test_stable_histogram_tie_goes_to_smaller_bucket(zero):
    items = np.array([1.0] * 8 + [5.0] * 8)
    assert stable_histogram(items, B, zero).bucket == 0


def test_sparse_vector_examples(zero):
    assert sparse_above_threshold([0.9, 0.1, 0.8, 0.6], 0.5, 2, 10, B, zero) == [0, 2]
    assert sparse_above_threshold([0.9, 0.8, 0.7], 0.5, 1, 10, B, zero) == [0]
    assert sparse_above_threshold([0.1, 0.2], 0.5, 2, 10, B, zero) == []


def test_sparse_scale_formula():
    assert sparse_scale(2, 50, 0.5, 1e-3) == pytest.approx(math.sqrt(32 * 2 * math.log(1e3) / 25))


def test_find_kth_examples(zero):
    V = grid([9.0, 1.0, 0.25])
    assert find_kth_largest_variance(V, 2, B, zero) == 1.0
    assert find_kth_largest_variance(V, 1, B, zero) == 4.0
    assert find_kth_largest_variance(grid([0.0, 0.0]), 1, B, zero) == 0.0


def test_variance_sum_examples(zero):
    V = grid([9.0, 1.0, 0.25])
    assert variance_sum(V, [0, 2], B, zero) == 4.0
    assert variance_sum(V, [1], B, zero) == 1.0


def test_variance_sum_empty_draws_nothing():
    class Counting(ZeroNoise):
        calls = 0

        def laplace(self, scale, size=None):
            Counting.calls += 1
            return super().laplace(scale, size)

    assert variance_sum(grid([1.0]), [], B, Counting()) == 0.0
    assert Counting.calls == 0


def test_top_var_examples(zero):
    V = grid([10.0, 0.1])
    np.testing.assert_array_equal(top_var_queries(V, 8.0), [1.0, 0.0])
    assert top_var(V, 8.0, 1, B, zero) == [0]
    assert top_var(grid([0.1, 0.2, 0.3]), 0.0, 2, B, zero) == [0, 1]
    assert top_var(grid([10.0, 0.1, 10.0]), 8.0, 3, B, zero) == [0, 2]


def test_histogram_bot_rate_with_noise():
    # 40 items in one bucket against tau = 1 + 2 ln 10: almost never Bot
    hits = sum(stable_histogram(np.full(40, 5.0), B, NoiseSource(s)).found for s in range(500))
    assert hits == 500


def test_variance_grid_law_matches_sampling(rng):
    v = np.array([2.0, 0.5])
    X = rng.standard_normal((40 * 2 * 30, 2)) * np.sqrt(v)
    a = group_variances(X, 30).grid
    b = sample_variance_estimates(v, 40, 30, 1).grid
    np.testing.assert_allclose(a.mean(axis=0), v, rtol=0.1)
    np.testing.assert_allclose(b.mean(axis=0), v, rtol=0.1)
