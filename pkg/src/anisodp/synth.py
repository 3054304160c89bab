"""Synthetic Gaussian data with configurable spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidSpec
from .linalg import apply_rows, sym_psd_power
from .types import DIAGONAL, CovarianceModel, Dataset, parse_covariance, validate_covariance
from .variance import VarianceEstimates

ISOTROPIC = "isotropic"
SPIKE = "spike"
POWERLAW = "powerlaw"
EXPDECAY = "expdecay"
EXPLICIT = "explicit"
SPECTRUM_KINDS = (ISOTROPIC, SPIKE, POWERLAW, EXPDECAY, EXPLICIT)


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a diagonal spectrum of dimension ``d``.

    Parameters used per kind: isotropic ``sigma2``; spike ``k``, ``high``,
    ``low``; powerlaw ``exponent``; expdecay ``sigma2`` (the first
    variance); explicit ``values``.
    """

    kind: str
    d: int
    sigma2: float = 1.0
    k: int = 1
    high: float = 1.0
    low: float = 0.0
    exponent: float = 1.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SPECTRUM_KINDS:
            raise InvalidSpec(f"unknown spectrum kind {self.kind!r}")
        if self.kind == EXPLICIT:
            if self.values is None:
                raise InvalidSpec("explicit spectrum needs values")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
            object.__setattr__(self, "d", len(self.values))
        if int(self.d) < 1:
            raise InvalidSpec(f"dimension must be at least 1, got {self.d}")
        if self.kind == SPIKE and not 1 <= self.k <= self.d:
            raise InvalidSpec(f"spike needs 1 <= k <= d, got k={self.k}, d={self.d}")
        if min(self.sigma2, self.high, self.low) < 0:
            raise InvalidSpec("variances must be nonnegative")
        if self.values is not None and (min(self.values) < 0 or not np.all(np.isfinite(self.values))):
            raise InvalidSpec("explicit variances must be finite and nonnegative")

    @classmethod
    def isotropic(cls, d, sigma2=1.0):
        return cls(ISOTROPIC, d, sigma2=sigma2)

    @classmethod
    def spike(cls, d, k, high=1.0, low=None):
        return cls(SPIKE, d, k=k, high=high, low=1.0 / d if low is None else low)

    @classmethod
    def powerlaw(cls, d, exponent):
        return cls(POWERLAW, d, exponent=exponent)

    @classmethod
    def expdecay(cls, d, sigma2=1.0):
        return cls(EXPDECAY, d, sigma2=sigma2)

    @classmethod
    def explicit(cls, values: Sequence[float]):
        return cls(EXPLICIT, len(values), values=tuple(values))

    def to_dict(self) -> dict:
        keys = {
            ISOTROPIC: ("sigma2",),
            SPIKE: ("k", "high", "low"),
            POWERLAW: ("exponent",),
            EXPDECAY: ("sigma2",),
            EXPLICIT: ("values",),
        }[self.kind]
        out = {"kind": self.kind, "d": self.d}
        out.update({key: getattr(self, key) for key in keys})
        if self.kind == EXPLICIT:
            out["values"] = list(self.values)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SpectrumSpec":
        obj = dict(obj)
        kind = str(obj.pop("kind", "")).lower()
        if kind == EXPLICIT:
            return cls.explicit(obj["values"])
        try:
            return cls(kind, int(obj.pop("d")), **obj)
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"bad spectrum spec: {exc}") from None


def make_spectrum(spec: SpectrumSpec) -> CovarianceModel:
    """Diagonal covariance with the variances described by ``spec``."""
    d = spec.d
    i = np.arange(1, d + 1, dtype=float)
    if spec.kind == ISOTROPIC:
        v = np.full(d, spec.sigma2)
    elif spec.kind == SPIKE:
        v = np.where(i <= spec.k, spec.high, spec.low)
    elif spec.kind == POWERLAW:
        v = i ** (-spec.exponent)
    elif spec.kind == EXPDECAY:
        v = spec.sigma2 * np.exp(-2 * (i - 1))
    else:
        v = np.array(spec.values)
    return validate_covariance(v, kind=DIAGONAL)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    mu: np.ndarray
    Sigma: CovarianceModel
    spectrum: Optional[SpectrumSpec] = None
    _root: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        if mu.shape != (self.Sigma.d,):
            raise DimensionMismatch(f"mu has shape {mu.shape}, covariance has d={self.Sigma.d}")

    @property
    def d(self) -> int:
        return self.Sigma.d

    @classmethod
    def from_spectrum(cls, spec: SpectrumSpec, mu=None) -> "GroundTruth":
        mu = np.zeros(spec.d) if mu is None else mu
        return cls(mu, make_spectrum(spec), spec)

    def sqrt_sigma(self) -> CovarianceModel:
        """Sigma^{1/2}, computed once per instance."""
        if not self._root:
            self._root.append(sym_psd_power(self.Sigma, 0.5))
        return self._root[0]

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "Sigma": self.Sigma.to_dict(),
            "spectrum": None if self.spectrum is None else self.spectrum.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj) -> "GroundTruth":
        """Accept either a full record or a bare ``{"spectrum": ..., "mu": optional}``."""
        if isinstance(obj, str):
            obj = json.loads(obj)
        spec = None if obj.get("spectrum") is None else SpectrumSpec.from_dict(obj["spectrum"])
        if obj.get("Sigma") is not None:
            Sigma = parse_covariance(obj["Sigma"], d=None if spec is None else spec.d)
        elif spec is not None:
            Sigma = make_spectrum(spec)
        else:
            raise InvalidSpec("ground truth needs a spectrum or a covariance")
        mu = obj.get("mu")
        if mu is None:
            mu = np.zeros(Sigma.d)
        elif np.ndim(mu) == 0:
            mu = np.full(Sigma.d, float(mu))
        return cls(mu, Sigma, spec)

    def __eq__(self, other):
        return (
            isinstance(other, GroundTruth)
            and np.array_equal(self.mu, other.mu)
            and self.Sigma == other.Sigma
            and self.spectrum == other.spectrum
        )


def sample_gaussian(truth: GroundTruth, n: int, seed: int) -> Dataset:
    """n i.i.d. rows of N(mu, Sigma), as mu + Sigma^{1/2} g."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(int(seed) % 2**64)
    g = rng.standard_normal((n, truth.d))
    rows = apply_rows(truth.sqrt_sigma(), g) + truth.mu
    rows.setflags(write=False)
    return Dataset(rows)


def sample_variance_estimates(variances, m: int, ell: int, seed: int) -> VarianceEstimates:
    """Grid with the law of group_variances on m * 2 * ell Gaussian rows.

    Each entry is sigma_i^2 * chi^2_ell / ell, drawn directly so large m stays cheap.
    """
    v = np.asarray(variances, dtype=float)
    if m < 1 or ell < 1:
        raise ValueError("need m >= 1 and ell >= 1")
    rng = np.random.default_rng(int(seed) % 2**64)
    grid = v * rng.chisquare(ell, size=(m, v.size)) / ell
    return VarianceEstimates(grid, int(ell))
