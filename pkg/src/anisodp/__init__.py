"""Differentially private mean estimation for anisotropic Gaussian data."""

from .errors import AnisoDPError
from .harness import TrialConfig, TrialMetrics, fit_loglog_slope, run_trials, sweep
from .mechanisms import (
    CompositionLedger,
    PrivacyGuarantee,
    compose_advanced,
    compose_basic,
    friendlycore_amplify,
    report_total_privacy,
)
from .noise import NoiseSource, ZeroNoise, derive_seed
from .rescaled import AvgConfig, accuracy_bound, default_lambda, known_cov_config, private_rescaled_avg
from .synth import GroundTruth, SpectrumSpec, make_spectrum, sample_gaussian
from .types import CovarianceModel, Dataset, EstimateOutcome, PrivacyBudget, validate_covariance, validate_dataset
from .unknown import UnknownCovConfig, choose_k_and_l, estimate_mean_unknown_cov

__version__ = "0.1.0"
