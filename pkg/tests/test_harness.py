import numpy as np
import pytest

from anisodp.errors import DegenerateInput
from anisodp.harness import (
    KNOWN_ANISO,
    KNOWN_FOLKLORE,
    UNKNOWN,
    TrialConfig,
    fit_loglog_slope,
    run_trials,
    sweep,
    sweep_csv,
    sweep_json,
)
from anisodp.synth import GroundTruth, SpectrumSpec
from anisodp.types import CovarianceModel, PrivacyBudget

B = PrivacyBudget(1.0, 1e-6)
TRUTH = GroundTruth.from_spectrum(SpectrumSpec.powerlaw(8, 2), mu=np.linspace(-1, 1, 8))


def cfg(**kw):
    base = dict(truth=TRUTH, estimator=KNOWN_ANISO, n=200, budget=B, trials=3, master_seed=17)
    base.update(kw)
    return TrialConfig(**base)


def test_deterministic():
    a, b = run_trials(cfg()), run_trials(cfg())
    assert a.errors == b.errors and a.noise_norms == b.noise_norms


def test_zero_covariance_zero_noise_exact():
    truth = GroundTruth(np.array([0.5, -1.25]), CovarianceModel.from_variances([0.0, 0.0]))
    m = run_trials(cfg(truth=truth, estimator=KNOWN_FOLKLORE, lam=1.0, zero_noise=True))
    assert m.errors == [0.0, 0.0, 0.0]
    assert m.summary()["warning"] == "NOT PRIVATE"


def test_abort_accounting():
    m = run_trials(cfg(n=12, trials=20))
    assert len(m.errors) + m.abort_count == 20
    assert m.abort_count > 0


def test_trial_seeds_independent_of_order():
    full = run_trials(cfg(trials=4))
    # the same trial index gives the same outcome in a run of a different length
    short = run_trials(cfg(trials=2))
    assert full.errors[:2] == short.errors


def test_workers_match_serial():
    a = run_trials(cfg(trials=4))
    b = run_trials(cfg(trials=4, workers=2))
    assert a.errors == b.errors


def test_unknown_estimator_runs():
    m = run_trials(cfg(estimator=UNKNOWN, n=2000, trials=2))
    assert m.trials == 2 and m.bound is None


def test_failure_rate_within_theory():
    truth = GroundTruth.from_spectrum(SpectrumSpec.spike(32, 10, 1.0, 1 / 32))
    beta = 0.05
    m = run_trials(cfg(truth=truth, n=1500, beta=beta, trials=200))
    fail = 1 - m.within_bound / m.trials
    se = np.sqrt(3.5 * beta * (1 - 3.5 * beta) / m.trials)
    assert fail <= 3.5 * beta + 3 * se


def test_sweep_rows_and_outputs():
    grid = [cfg(n=n, trials=1) for n in (1000, 2000, 4000, 8000)]
    rows = sweep(grid)
    assert len(rows) == 4
    csv_text = sweep_csv(rows)
    assert len(csv_text.strip().splitlines()) == 5
    assert '"config"' in sweep_json(rows)
    with pytest.raises(ValueError):
        sweep([])


def test_config_round_trip():
    c = cfg(k=3, ell=5, lam=2.0)
    assert TrialConfig.from_dict(c.to_dict()) == c


def test_fit_slope_examples():
    assert fit_loglog_slope([1, 2, 4], [1, 0.5, 0.25]) == pytest.approx(-1.0)
    assert fit_loglog_slope([1, 2], [3, 3]) == pytest.approx(0.0)
    assert fit_loglog_slope([1, 10, 100], [2, 20, 200]) == pytest.approx(1.0)


@pytest.mark.parametrize("xs,ys", [([1], [1]), ([1, 2], [1, 0]), ([1, -2], [1, 1]), ([2, 2], [1, 3]), ([1, 2], [1])])
def test_fit_slope_degenerate(xs, ys):
    with pytest.raises(DegenerateInput):
        fit_loglog_slope(xs, ys)
