import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anisodp.filter import FilterParams, dist_predicate, inclusion_probabilities, predicate_table
from anisodp.harness import fit_loglog_slope
from anisodp.linalg import sym_psd_power
from anisodp.mechanisms import CompositionLedger, compose_advanced, compose_basic, friendlycore_amplify
from anisodp.noise import ZeroNoise
from anisodp.rescaled import AvgConfig, private_rescaled_avg
from anisodp.types import CovarianceModel, PrivacyBudget, validate_covariance
from anisodp.variance import bucket_index, group_variances, sparse_above_threshold, stable_histogram

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
eps_st = st.floats(1e-3, 5.0)
delta_st = st.floats(1e-12, 0.4)


@st.composite
def psd_matrices(draw, min_eig=0.0):
    d = draw(st.integers(1, 5))
    A = draw(arrays(float, (d, d), elements=finite))
    M = A @ A.T / max(1.0, float(np.abs(A).max()) ** 2) + min_eig * np.eye(d)
    return validate_covariance((M + M.T) / 2)


# x -> x^{1/4} has unbounded slope at 0, so eigenvalues at rounding level
# (~1e-16) would move by ~1e-4; keep the spectrum away from zero.
@given(psd_matrices(min_eig=1e-4))
def test_half_of_half_is_quarter(M):
    a = sym_psd_power(sym_psd_power(M, 0.5), 0.5).dense()
    b = sym_psd_power(M, 0.25).dense()
    assert np.linalg.norm(a - b, 2) <= 1e-8


@given(psd_matrices(min_eig=0.1))
def test_quarter_powers_cancel(M):
    prod = sym_psd_power(M, -0.25).dense() @ sym_psd_power(M, 0.25).dense()
    assert np.linalg.norm(prod - np.eye(M.d), 2) <= 1e-8


@given(st.lists(st.tuples(eps_st, st.floats(0, 0.01)), min_size=1, max_size=20))
def test_basic_composition_sums(pairs):
    g = compose_basic(CompositionLedger.from_pairs(pairs))
    assert math.isclose(g.epsilon, math.fsum(p[0] for p in pairs), rel_tol=1e-12)
    assert math.isclose(g.delta, math.fsum(p[1] for p in pairs), rel_tol=1e-12, abs_tol=1e-300)


@given(eps_st, st.floats(1e-12, 0.3))
def test_advanced_overhead_single_entry(eps, dt):
    assert compose_advanced([(eps, 0.0)], dt).epsilon > eps


@given(st.floats(1e-3, 2.0), st.floats(1e-3, 2.0), delta_st)
def test_amplify_monotone_in_eps(a, b, delta):
    lo, hi = sorted((a, b))
    assume(hi - lo > 1e-9)
    assert friendlycore_amplify(lo, delta).epsilon < friendlycore_amplify(hi, delta).epsilon
    assert friendlycore_amplify(lo, delta).delta < friendlycore_amplify(hi, delta).delta


@given(st.floats(1e-300, 1e300))
def test_bucket_index_is_floor_log4(x):
    b = int(bucket_index(np.array([x]))[0])
    q = Fraction(x)
    assert Fraction(4) ** b <= q < Fraction(4) ** (b + 1)


@given(st.integers(1, 200), st.data())
def test_inclusion_probabilities_range_and_order(n, data):
    counts = np.array(sorted(data.draw(st.lists(st.integers(1, n), min_size=1, max_size=30))))
    p = inclusion_probabilities(counts, n)
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) >= 0)


@settings(suppress_health_check=[HealthCheck.too_slow], deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 12), st.integers(1, 3)), elements=finite), st.floats(0, 20))
def test_predicate_table_matches_pairwise(X, lam):
    p = FilterParams.from_matrix(CovarianceModel.from_variances(np.arange(1.0, X.shape[1] + 1)), lam)
    brute = np.array([[dist_predicate(a, b, p) for b in X] for a in X], dtype=bool)
    np.testing.assert_array_equal(predicate_table(X, p), brute)
    np.testing.assert_array_equal(brute, brute.T)


@settings(deadline=None)
@given(arrays(float, st.tuples(st.integers(11, 40), st.integers(1, 4)), elements=st.floats(-1, 1)))
def test_zero_noise_all_kept_is_empirical_mean(X):
    # every pair is within lambda = 10 * sqrt(d), so every p_j = 1
    cfg = AvgConfig(CovarianceModel.identity(X.shape[1]), 10.0 * math.sqrt(X.shape[1]), PrivacyBudget(1.0, 1e-4))
    out = private_rescaled_avg(X, cfg, ZeroNoise())
    assert not out.aborted
    np.testing.assert_array_equal(out.mean, X.mean(axis=0))


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=60), st.floats(0.1, 5), st.floats(1e-6, 0.5))
def test_zero_noise_histogram_brute_force(items, eps, delta):
    out = stable_histogram(np.array(items), PrivacyBudget(eps, delta), ZeroNoise())
    buckets = {}
    for x in items:
        key = None if x == 0 else math.floor(math.log(x, 4) + 1e-12)
        if key is not None and 4.0 ** key > x:
            key -= 1
        buckets[key] = buckets.get(key, 0) + 1
    order = sorted(buckets, key=lambda b: (-buckets[b], -math.inf if b is None else b))
    best = order[0]
    tau = 1 + 2 * math.log(1 / delta) / eps
    if buckets[best] >= tau:
        assert out.found and out.bucket == best
    else:
        assert not out.found


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1), st.integers(1, 5))
def test_zero_noise_sparse_vector_brute_force(qs, T, k):
    got = sparse_above_threshold(qs, T, k, 10, PrivacyBudget(1.0, 0.1), ZeroNoise())
    assert got == [i for i, q in enumerate(qs) if q >= T][:k]


@given(arrays(float, st.tuples(st.integers(2, 24), st.integers(1, 3)), elements=finite), st.integers(1, 4))
def test_group_variances_brute_force(X, ell):
    assume(X.shape[0] >= 2 * ell)
    V = group_variances(X, ell).grid
    m = X.shape[0] // (2 * ell)
    for j in range(m):
        for i in range(X.shape[1]):
            s = sum((X[2 * ell * j + 2 * r, i] - X[2 * ell * j + 2 * r + 1, i]) ** 2 for r in range(ell))
            assert math.isclose(V[j, i], s / (2 * ell), rel_tol=1e-12, abs_tol=1e-12)


@given(st.floats(-3, 3), st.floats(0.1, 10), st.lists(st.floats(0.1, 1e4), min_size=2, max_size=8, unique=True))
def test_slope_recovers_power_law(p, c, xs):
    assume(max(xs) / min(xs) > 1.01)
    ys = [c * x**p for x in xs]
    assert math.isclose(fit_loglog_slope(xs, ys), p, abs_tol=1e-8)
