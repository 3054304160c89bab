"""Private re-scaled averaging with a known re-scaling matrix.

The anisotropic estimator runs with ``M = Sigma``; the folklore baseline is
the same code with ``M = I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filter import FilterParams, basic_filter
from .linalg import apply_rows, floor_spectrum, sandwich, spectral_summary, sym_psd_power
from .noise import NoiseSource
from .types import CovarianceModel, Dataset, EstimateOutcome, PrivacyBudget, validate_dataset

EPS_MAX = 10.0


@dataclass(frozen=True)
class AvgConfig:
    M: CovarianceModel
    lam: float
    budget: PrivacyBudget
    beta: float = 0.05

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not self.budget.epsilon < EPS_MAX:
            raise ValueError(f"epsilon must be below {EPS_MAX}, got {self.budget.epsilon}")


def default_lambda(Sigma: CovarianceModel, M: CovarianceModel, n: int, beta: float) -> float:
    """Smallest clipping scale for which every pair survives the filter w.p. 1 - beta.

    With A = M^{-1/4} Sigma M^{-1/4}:
    lambda = sqrt(2 tr A) + 2 sqrt(2 ||A|| log(n / beta)).
    """
    if n < 1 or not 0 < beta < 1:
        raise ValueError("need n >= 1 and beta in (0, 1)")
    A = spectral_summary(sandwich(sym_psd_power(M, -0.25), Sigma))
    return math.sqrt(2 * A.trace) + 2 * math.sqrt(2 * A.op_norm * math.log(n / beta))


def noise_multiplier(lam: float, n_hat: float, budget: PrivacyBudget) -> float:
    """Scalar c with eta = c * M^{1/4} g, so Cov(eta) = 8 log(1.25/delta) lambda^2 / (eps n_hat)^2 * M^{1/2}."""
    return math.sqrt(8 * math.log(1.25 / budget.delta)) * lam / (budget.epsilon * n_hat)


def private_rescaled_avg(X: Dataset, cfg: AvgConfig, src: NoiseSource, diagnostics: bool = False) -> EstimateOutcome:
    """Filter, release a noisy core size, and add M^{1/2}-shaped Gaussian noise.

    Draw order: Bernoulli per row, one Laplace, then d Gaussians. With
    ``diagnostics`` the outcome also records the noise vector norm and the
    core mean, which are not part of the private output.
    """
    X = validate_dataset(X)
    eps, delta = cfg.budget.epsilon, cfg.budget.delta
    core = basic_filter(X, FilterParams.from_matrix(cfg.M, cfg.lam), src)
    size = core.core_size
    n_hat = size - math.log(1 / delta) / eps + src.laplace(1 / eps)
    info = {"core_size": size, "n_hat": n_hat} if diagnostics else {}
    if size == 0 or n_hat <= 0:
        return EstimateOutcome.abort(**info)
    core_mean = X.rows[core.mask].mean(axis=0)
    g = src.gaussian(X.d)
    eta = noise_multiplier(cfg.lam, n_hat, cfg.budget) * apply_rows(sym_psd_power(cfg.M, 0.25), g)
    if diagnostics:
        info.update(noise_norm=float(np.linalg.norm(eta)), core_mean=core_mean, noise=eta)
    return EstimateOutcome(core_mean + eta, info)


def accuracy_bound(Sigma: CovarianceModel, M: CovarianceModel, lam: float, n: int, eps: float, delta: float,
                   beta: float) -> float:
    """Error level met with probability 1 - 7 beta / 2 when lambda is large enough."""
    S = spectral_summary(Sigma)
    R = spectral_summary(sym_psd_power(M, 0.5))
    sampling = (math.sqrt(S.trace) + math.sqrt(2 * S.op_norm * math.log(1 / beta))) / math.sqrt(n)
    privacy = 4 * math.sqrt(2 * math.log(1.25 / delta)) * lam / (eps * n) * (
        math.sqrt(R.trace) + math.sqrt(2 * R.op_norm * math.log(1 / beta))
    )
    return sampling + privacy


def known_cov_config(Sigma: CovarianceModel, n: int, budget: PrivacyBudget, beta: float, folklore: bool = False,
                     lam: float | None = None, m_floor: float | None = None) -> AvgConfig:
    """Configuration for the anisotropic estimator (M = Sigma) or the folklore one (M = I).

    ``m_floor`` lifts the spectrum of M = Sigma to at least ``m_floor`` times its
    largest eigenvalue, for covariances too close to singular to invert.
    """
    if folklore:
        M = CovarianceModel.identity(Sigma.d)
    else:
        M = Sigma if m_floor is None else floor_spectrum(Sigma, m_floor)
    if lam is None:
        lam = default_lambda(Sigma, M, n, beta)
    return AvgConfig(M, lam, budget, beta)
