"""Mean estimation when the (diagonal) covariance is unknown.

Half of the sample estimates per-coordinate variances privately; the other
half runs re-scaled averaging twice, once on the top-variance coordinates
with M = diag of their estimates and once on the rest with M = I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import HistogramBot, TooFewSamples
from .mechanisms import AVG, VARIANCE_SUM, CompositionLedger
from .noise import NoiseSource
from .rescaled import AvgConfig, private_rescaled_avg
from .types import CovarianceModel, PrivacyBudget, validate_dataset
from .variance import VarianceEstimates, find_kth_largest_variance, group_variances, top_var, variance_sum

LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class UnknownCovConfig:
    budget: PrivacyBudget
    beta: float = 0.05
    k: Optional[int] = None
    ell: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.k is not None and self.k < 1:
            raise ValueError("k override must be at least 1")
        if self.ell is not None and self.ell < 1:
            raise ValueError("ell override must be at least 1")


@dataclass(frozen=True)
class Plan:
    """Sizes for one run: k coordinates to learn, ell pairs per group, m groups, n rows per half."""

    k: int
    ell: int
    m: int
    n: int
    required_n: float


def default_ell(d: int) -> int:
    return max(1, math.ceil(16 * math.log(16 * max(d, 2))))


def required_half_size(d: int, budget: PrivacyBudget, beta: float) -> float:
    """log^2 d + log(1/(delta beta)) sqrt(log(1/delta)) log(d) / eps, with constant 1."""
    eps, delta = budget.epsilon, budget.delta
    log_d = math.log(d)
    return log_d**2 + math.log(1 / (delta * beta)) * math.sqrt(math.log(1 / delta)) * log_d / eps


def default_k(n: int, d: int, budget: PrivacyBudget, beta: float) -> int:
    """Number of top variances worth learning privately, clamped to [1, d].

    eps^2 n^2 / (log^2 d log(1/delta) log^2(1/(delta beta)) + log(eps n)), with
    the last term clamped at 0 when eps n <= 1.
    """
    eps, delta = budget.epsilon, budget.delta
    denom = math.log(d) ** 2 * math.log(1 / delta) * math.log(1 / (delta * beta)) ** 2 + max(math.log(eps * n), 0.0)
    raw = d if denom <= 0 else round(eps**2 * n**2 / denom)
    return int(min(max(raw, 1), d))


def choose_k_and_l(n_total: int, d: int, budget: PrivacyBudget, beta: float, k: Optional[int] = None,
                   ell: Optional[int] = None) -> Plan:
    """Split sizes for 2n = ``n_total`` rows; raises TooFewSamples when the plan is infeasible."""
    if n_total < 2:
        raise TooFewSamples("need at least two samples to split")
    n = n_total // 2
    k = default_k(n, d, budget, beta) if k is None else int(min(max(k, 1), d))
    ell = default_ell(d) if ell is None else int(ell)
    m = n // (2 * ell)
    required = required_half_size(d, budget, beta)
    if m == 0:
        raise TooFewSamples(f"{n} samples per half cannot fill one group of {2 * ell}")
    if n < required:
        raise TooFewSamples(f"{n} samples per half is below the required {required:.1f}")
    return Plan(k, ell, m, n, required)


def top_lambda(sigma_hat: np.ndarray, n: int, beta: float) -> float:
    if sigma_hat.size == 0:
        return LAMBDA_FLOOR
    roots = np.sqrt(np.clip(sigma_hat, 0, None))
    lam = math.sqrt(4 * roots.sum()) + 2 * math.sqrt(4 * roots.max() * math.log(n / beta))
    return max(lam, LAMBDA_FLOOR * (1 + float(sigma_hat.max())))


def bottom_lambda(s_hat: float, n: int, beta: float) -> float:
    lam = 2 * math.sqrt(max(s_hat, 0.0) * (1 + 2 * math.log(n / beta)))
    return max(lam, LAMBDA_FLOOR * (1 + s_hat))


def locate_top(V: VarianceEstimates, k: int, budget: PrivacyBudget, src: NoiseSource):
    """Private k-th largest variance R and the coordinates TopVar keeps at threshold R / 8."""
    R_hat = find_kth_largest_variance(V, k, budget, src)
    return R_hat, top_var(V, R_hat / 8, k, budget, src)


@dataclass
class UnknownCovResult:
    mean: Optional[np.ndarray]
    d: int
    I_top: List[int] = field(default_factory=list)
    Sigma_hat_top: np.ndarray = field(default_factory=lambda: np.zeros(0))
    S_hat_bot: Optional[float] = None
    R_hat: Optional[float] = None
    ledger: CompositionLedger = field(default_factory=CompositionLedger)
    diagnostics: dict = field(default_factory=dict)
    abort_reason: Optional[str] = None

    @property
    def aborted(self) -> bool:
        return self.mean is None

    @property
    def I_bot(self) -> List[int]:
        top = set(self.I_top)
        return [i for i in range(self.d) if i not in top]

    def to_dict(self) -> dict:
        return {
            "outcome": "abort" if self.aborted else "mean",
            "mean": None if self.mean is None else self.mean.tolist(),
            "abort_reason": self.abort_reason,
            "I_top": list(self.I_top),
            "Sigma_hat_top": self.Sigma_hat_top.tolist(),
            "S_hat_bot": self.S_hat_bot,
            "R_hat": self.R_hat,
            "ledger": self.ledger.to_list(),
            "diagnostics": self.diagnostics,
        }


def estimate_mean_unknown_cov(X, cfg: UnknownCovConfig, src: NoiseSource) -> UnknownCovResult:
    """Run the full unknown-covariance pipeline on 2n rows.

    Rows 1..n estimate variances, rows n+1..2n the mean. Any Bot or abort in
    a sub-call aborts the whole estimate; nothing is retried.
    """
    X = validate_dataset(X)
    d = X.d
    eps, delta, beta = cfg.budget.epsilon, cfg.budget.delta, cfg.beta
    plan = choose_k_and_l(X.n, d, cfg.budget, beta, cfg.k, cfg.ell)
    k, n = plan.k, plan.n
    res = UnknownCovResult(None, d)
    calls = []
    res.diagnostics = {"k": k, "ell": plan.ell, "m": plan.m, "n": n, "required_n": plan.required_n, "calls": calls}

    def fail(name, reason):
        calls.append({"name": name, "status": reason})
        res.abort_reason = f"{name}: {reason}"
        return res

    X_var, X_mean = X.rows[:n], X.rows[n:2 * n]
    V = group_variances(X_var, plan.ell)

    res.ledger.record(eps, delta, "kth_largest_variance")
    try:
        res.R_hat = find_kth_largest_variance(V, k, cfg.budget, src)
    except HistogramBot:
        return fail("kth_largest_variance", "bot")
    calls.append({"name": "kth_largest_variance", "status": "ok"})

    res.ledger.record(eps, delta, "top_var")
    res.I_top = sorted(top_var(V, res.R_hat / 8, k, cfg.budget, src))
    calls.append({"name": "top_var", "status": "ok"})
    res.diagnostics["top_var_short"] = len(res.I_top) < k
    I_bot = res.I_bot

    sub = PrivacyBudget(eps / math.sqrt(k * math.log(1 / delta)), delta / k)
    res.diagnostics["sub_budget"] = {"epsilon": sub.epsilon, "delta": sub.delta, "beta": beta / k}
    sigma_hat = []
    for i in res.I_top:
        res.ledger.record(sub.epsilon, sub.delta, f"variance_sum[{i}]", VARIANCE_SUM)
        try:
            sigma_hat.append(variance_sum(V, [i], sub, src))
        except HistogramBot:
            return fail(f"variance_sum[{i}]", "bot")
    res.Sigma_hat_top = np.array(sigma_hat, dtype=float)

    res.ledger.record(eps, delta, "variance_sum_bottom")
    try:
        res.S_hat_bot = variance_sum(V, I_bot, cfg.budget, src)
    except HistogramBot:
        return fail("variance_sum_bottom", "bot")
    calls.append({"name": "variance_sums", "status": "ok"})

    mean = np.empty(d)
    res.ledger.record(eps, delta, "avg_top", AVG)
    if res.I_top:
        floor = LAMBDA_FLOOR * (1 + float(res.Sigma_hat_top.max()))
        M_top = CovarianceModel.from_variances(np.maximum(res.Sigma_hat_top, floor))
        lam_top = top_lambda(res.Sigma_hat_top, n, beta)
        res.diagnostics["lambda_top"] = lam_top
        out = private_rescaled_avg(X_mean[:, res.I_top], AvgConfig(M_top, lam_top, cfg.budget, beta), src)
        if out.aborted:
            return fail("avg_top", "abort")
        mean[res.I_top] = out.mean
    calls.append({"name": "avg_top", "status": "ok"})

    res.ledger.record(eps, delta, "avg_bottom", AVG)
    if I_bot:
        lam_bot = bottom_lambda(res.S_hat_bot, n, beta)
        res.diagnostics["lambda_bottom"] = lam_bot
        cfg_bot = AvgConfig(CovarianceModel.identity(len(I_bot)), lam_bot, cfg.budget, beta)
        out = private_rescaled_avg(X_mean[:, I_bot], cfg_bot, src)
        if out.aborted:
            return fail("avg_bottom", "abort")
        mean[I_bot] = out.mean
    calls.append({"name": "avg_bottom", "status": "ok"})

    res.mean = mean
    return res
