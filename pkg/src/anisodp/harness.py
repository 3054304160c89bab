"""Monte Carlo driver: repeated trials, sweeps, and log-log slope fits."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import DegenerateInput
from .noise import NoiseSource, ZeroNoise, derive_seed
from .rescaled import accuracy_bound, known_cov_config, private_rescaled_avg
from .synth import GroundTruth, sample_gaussian
from .types import PrivacyBudget
from .unknown import UnknownCovConfig, estimate_mean_unknown_cov

KNOWN_ANISO = "known_aniso"
KNOWN_FOLKLORE = "known_folklore"
UNKNOWN = "unknown"
ESTIMATORS = (KNOWN_ANISO, KNOWN_FOLKLORE, UNKNOWN)

# keys under derive_seed(master_seed, trial, .)
DATA_KEY = 0
NOISE_KEY = 1


@dataclass(frozen=True)
class TrialConfig:
    """One experimental cell.

    ``n`` is the total number of samples handed to the estimator; the
    unknown-covariance pipeline splits it into two halves.
    """

    truth: GroundTruth
    estimator: str
    n: int
    budget: PrivacyBudget
    beta: float = 0.05
    trials: int = 1
    master_seed: int = 0
    zero_noise: bool = False
    lam: Optional[float] = None
    k: Optional[int] = None
    ell: Optional[int] = None
    m_floor: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "truth": self.truth.to_dict(),
            "estimator": self.estimator,
            "n": self.n,
            "epsilon": self.budget.epsilon,
            "delta": self.budget.delta,
            "beta": self.beta,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "zero_noise": self.zero_noise,
            "lambda": self.lam,
            "k": self.k,
            "ell": self.ell,
            "m_floor": self.m_floor,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TrialConfig":
        return cls(
            truth=GroundTruth.from_dict(obj["truth"]),
            estimator=obj["estimator"],
            n=int(obj["n"]),
            budget=PrivacyBudget(float(obj["epsilon"]), float(obj["delta"])),
            beta=float(obj.get("beta", 0.05)),
            trials=int(obj.get("trials", 1)),
            master_seed=int(obj.get("master_seed", 0)),
            zero_noise=bool(obj.get("zero_noise", False)),
            lam=obj.get("lambda"),
            k=obj.get("k"),
            ell=obj.get("ell"),
            m_floor=obj.get("m_floor"),
            workers=int(obj.get("workers", 1)),
        )


@dataclass
class TrialRecord:
    trial: int
    error: Optional[float]
    noise_norm: Optional[float] = None
    sampling_error: Optional[float] = None
    core_size: Optional[int] = None
    abort_reason: Optional[str] = None

    @property
    def aborted(self) -> bool:
        return self.error is None


@dataclass
class TrialMetrics:
    """Per-trial outcomes in trial order plus the closed-form bound when one applies."""

    records: List[TrialRecord]
    elapsed: float = 0.0
    bound: Optional[float] = None
    lam: Optional[float] = None
    private: bool = True

    @property
    def trials(self) -> int:
        return len(self.records)

    @property
    def errors(self) -> List[float]:
        return [r.error for r in self.records if not r.aborted]

    @property
    def abort_count(self) -> int:
        return sum(r.aborted for r in self.records)

    @property
    def noise_norms(self) -> List[float]:
        return [r.noise_norm for r in self.records if r.noise_norm is not None]

    @property
    def sampling_errors(self) -> List[float]:
        return [r.sampling_error for r in self.records if r.sampling_error is not None]

    @property
    def within_bound(self) -> Optional[int]:
        """Trials that returned an estimate within ``bound``; aborts count as misses."""
        if self.bound is None:
            return None
        return sum(1 for e in self.errors if e <= self.bound)

    def median_error(self) -> float:
        """Median over all trials with aborts counted as infinite error."""
        full = [math.inf if r.aborted else r.error for r in self.records]
        return float(np.median(full))

    def summary(self) -> dict:
        errs = np.array(self.errors)
        norms = np.array(self.noise_norms)
        out = {
            "trials": self.trials,
            "abort_count": self.abort_count,
            "mean_error": float(errs.mean()) if errs.size else None,
            "median_error": self.median_error(),
            "q90_error": float(np.quantile(errs, 0.9)) if errs.size else None,
            "mean_noise_norm": float(norms.mean()) if norms.size else None,
            "bound": self.bound,
            "within_bound": self.within_bound,
            "lambda": self.lam,
            "elapsed": self.elapsed,
        }
        if not self.private:
            out["warning"] = "NOT PRIVATE"
        return out

    def to_dict(self) -> dict:
        return {"summary": self.summary(), "records": [vars(r) for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_json_default)


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _known_setup(cfg: TrialConfig):
    avg = known_cov_config(cfg.truth.Sigma, cfg.n, cfg.budget, cfg.beta,
                           folklore=cfg.estimator == KNOWN_FOLKLORE, lam=cfg.lam, m_floor=cfg.m_floor)
    bound = accuracy_bound(cfg.truth.Sigma, avg.M, avg.lam, cfg.n, cfg.budget.epsilon, cfg.budget.delta, cfg.beta)
    return avg, bound


def _run_one(cfg: TrialConfig, t: int, avg=None) -> TrialRecord:
    X = sample_gaussian(cfg.truth, cfg.n, derive_seed(cfg.master_seed, t, DATA_KEY))
    noise_seed = derive_seed(cfg.master_seed, t, NOISE_KEY)
    src = ZeroNoise(noise_seed) if cfg.zero_noise else NoiseSource(noise_seed)
    mu = cfg.truth.mu
    if cfg.estimator == UNKNOWN:
        ucfg = UnknownCovConfig(cfg.budget, cfg.beta, cfg.k, cfg.ell)
        res = estimate_mean_unknown_cov(X, ucfg, src)
        if res.aborted:
            return TrialRecord(t, None, abort_reason=res.abort_reason)
        return TrialRecord(t, float(np.linalg.norm(res.mean - mu)))
    out = private_rescaled_avg(X, avg, src, diagnostics=True)
    info = out.diagnostics
    if out.aborted:
        return TrialRecord(t, None, core_size=info["core_size"], abort_reason="avg: abort")
    return TrialRecord(
        t,
        float(np.linalg.norm(out.mean - mu)),
        noise_norm=info["noise_norm"],
        sampling_error=float(np.linalg.norm(info["core_mean"] - mu)),
        core_size=info["core_size"],
    )


def _run_chunk(args):
    cfg, ts, avg = args
    return [_run_one(cfg, t, avg) for t in ts]


def run_trials(cfg: TrialConfig) -> TrialMetrics:
    """Run ``cfg.trials`` independent trials; trial t uses seeds derived from (master_seed, t)."""
    start = time.perf_counter()
    avg, bound = (None, None) if cfg.estimator == UNKNOWN else _known_setup(cfg)
    ts = list(range(cfg.trials))
    if cfg.workers > 1 and cfg.trials > 1:
        chunks = [ts[i::cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = [r for part in pool.map(_run_chunk, [(cfg, c, avg) for c in chunks]) for r in part]
        records.sort(key=lambda r: r.trial)
    else:
        records = _run_chunk((cfg, ts, avg))
    return TrialMetrics(
        records,
        elapsed=time.perf_counter() - start,
        bound=bound,
        lam=None if avg is None else avg.lam,
        private=not cfg.zero_noise,
    )


def sweep(grid: Sequence[TrialConfig]) -> List[tuple]:
    """(config, metrics) for every cell, in grid order."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep needs at least one configuration")
    return [(cfg, run_trials(cfg)) for cfg in grid]


CSV_FIELDS = ("estimator", "d", "spectrum", "n", "epsilon", "delta", "beta", "master_seed", "trials", "abort_count",
              "mean_error", "median_error", "q90_error", "mean_noise_norm", "bound", "within_bound", "lambda",
              "elapsed")


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS + ("warning",), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for cfg, metrics in rows:
        spec = cfg.truth.spectrum
        row = {
            "estimator": cfg.estimator,
            "d": cfg.truth.d,
            "spectrum": "" if spec is None else spec.kind,
            "n": cfg.n,
            "epsilon": cfg.budget.epsilon,
            "delta": cfg.budget.delta,
            "beta": cfg.beta,
            "master_seed": cfg.master_seed,
        }
        row.update(metrics.summary())
        writer.writerow(row)
    return buf.getvalue()


def sweep_json(rows) -> str:
    return json.dumps([{"config": cfg.to_dict(), **m.to_dict()} for cfg, m in rows], default=_json_default)


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DegenerateInput("need two or more paired points")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x) & np.isfinite(y)):
        raise DegenerateInput("all points must be positive and finite")
    lx, ly = np.log(x), np.log(y)
    lx = lx - lx.mean()
    denom = float(lx @ lx)
    if denom == 0:
        raise DegenerateInput("all x values are equal")
    return float(lx @ (ly - ly.mean())) / denom
