"""Shared domain types, validation, and CSV/JSON ingestion."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyData,
    NegativeVariance,
    NonFinite,
    NotPSD,
    NotSymmetric,
    RaggedRows,
)

SYM_TOL = 1e-9
PSD_TOL = 1e-9

FULL = "full"
DIAGONAL = "diagonal"
SPHERICAL = "spherical"
KINDS = (FULL, DIAGONAL, SPHERICAL)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """n samples of dimension d, one row per individual."""

    rows: np.ndarray

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        return isinstance(other, Dataset) and np.array_equal(self.rows, other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.rows:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """PSD covariance in one of three representations.

    ``payload`` is a d x d matrix (full), a length-d vector of variances
    (diagonal) or a 0-d array holding one shared variance (spherical).
    """

    kind: str
    payload: np.ndarray
    d: int

    def diagonal(self) -> np.ndarray:
        if self.kind == FULL:
            return np.diag(self.payload).copy()
        if self.kind == DIAGONAL:
            return np.array(self.payload)
        return np.full(self.d, float(self.payload))

    def dense(self) -> np.ndarray:
        if self.kind == FULL:
            return np.array(self.payload)
        return np.diag(self.diagonal())

    def to_dict(self) -> dict:
        if self.kind == SPHERICAL:
            return {"kind": SPHERICAL, "data": float(self.payload), "d": self.d}
        return {"kind": self.kind, "data": self.payload.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __eq__(self, other):
        return (
            isinstance(other, CovarianceModel)
            and self.kind == other.kind
            and self.d == other.d
            and np.array_equal(self.payload, other.payload)
        )

    @classmethod
    def identity(cls, d: int) -> "CovarianceModel":
        return cls(SPHERICAL, _frozen(1.0), int(d))

    @classmethod
    def from_variances(cls, variances) -> "CovarianceModel":
        return validate_covariance(np.asarray(variances, dtype=float), kind=DIAGONAL)


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) pair handed to a mechanism."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")


@dataclass(frozen=True, eq=False)
class EstimateOutcome:
    """Either a mean estimate or an explicit abort (``mean is None``)."""

    mean: Optional[np.ndarray]
    diagnostics: dict = field(default_factory=dict)

    @property
    def aborted(self) -> bool:
        return self.mean is None

    @classmethod
    def abort(cls, **diagnostics: Any) -> "EstimateOutcome":
        return cls(None, diagnostics)


def validate_dataset(raw) -> Dataset:
    if isinstance(raw, Dataset):
        return raw
    if isinstance(raw, np.ndarray):
        if raw.size == 0:
            raise EmptyData("dataset has no entries")
        if raw.ndim != 2:
            raise RaggedRows(f"expected a 2-d matrix, got shape {raw.shape}")
        arr = np.asarray(raw, dtype=float)
    else:
        rows = list(raw)
        if not rows:
            raise EmptyData("dataset has no rows")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise RaggedRows(f"rows have differing lengths {sorted(widths)}")
        if widths == {0}:
            raise EmptyData("rows have dimension 0")
        arr = np.array(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite("dataset contains NaN or infinite entries")
    return Dataset(_frozen(arr))


def validate_covariance(raw, kind: Optional[str] = None, d: Optional[int] = None) -> CovarianceModel:
    """Check symmetry and positive semidefiniteness and tag the representation.

    Without ``kind`` the representation follows the array rank: 2-d is full,
    1-d diagonal and a scalar spherical (which then needs ``d``).
    """
    if isinstance(raw, CovarianceModel):
        return raw
    arr = np.asarray(raw, dtype=float)
    if kind is None:
        kind = {2: FULL, 1: DIAGONAL, 0: SPHERICAL}.get(arr.ndim)
    if kind not in KINDS:
        raise DimensionMismatch(f"cannot interpret covariance of shape {arr.shape} as {kind!r}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("covariance contains NaN or infinite entries")

    if kind == FULL:
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatch(f"full covariance must be square, got shape {arr.shape}")
        scale = max(1.0, float(np.max(np.abs(arr))))
        if np.max(np.abs(arr - arr.T)) > SYM_TOL * scale:
            raise NotSymmetric("covariance matrix is not symmetric")
        eig = np.linalg.eigvalsh((arr + arr.T) / 2)
        if eig[0] < -PSD_TOL * max(eig[-1], 0.0) or (eig[-1] <= 0 and eig[0] < 0):
            raise NotPSD(f"covariance has negative eigenvalue {eig[0]:.6g}")
        return CovarianceModel(FULL, _frozen(arr), arr.shape[0])

    if kind == DIAGONAL:
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatch(f"diagonal covariance must be a nonempty vector, got shape {arr.shape}")
        if np.any(arr < 0):
            raise NegativeVariance("diagonal covariance has a negative variance")
        return CovarianceModel(DIAGONAL, _frozen(arr), arr.size)

    if arr.ndim != 0:
        raise DimensionMismatch("spherical covariance takes a single variance")
    if d is None or int(d) < 1:
        raise DimensionMismatch("spherical covariance needs a dimension d >= 1")
    if arr < 0:
        raise NegativeVariance("spherical variance is negative")
    return CovarianceModel(SPHERICAL, _frozen(arr), int(d))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_csv(text: str) -> Dataset:
    """One sample per row; a first row that is not all numbers is a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    try:
        parsed = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise NonFinite(f"non-numeric entry in CSV: {exc}") from None
    return validate_dataset(parsed)


def read_csv(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh.read())


def parse_covariance(obj, d: Optional[int] = None) -> CovarianceModel:
    """Build a model from ``{"kind": ..., "data": ..., "d": optional}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = str(obj.get("kind", "")).lower()
    if kind not in KINDS:
        raise DimensionMismatch(f"unknown covariance kind {obj.get('kind')!r}")
    return validate_covariance(obj["data"], kind=kind, d=obj.get("d", d))


def read_covariance(path, d: Optional[int] = None) -> CovarianceModel:
    with open(path, encoding="utf-8") as fh:
        return parse_covariance(json.load(fh), d=d)
