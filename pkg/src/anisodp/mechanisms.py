"""Scalar DP primitives and the privacy accountant.

The accountant reports guarantees; it never rescales the budgets an
estimator was called with.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import EmptyLedger, EpsilonOutOfRange, InvalidDelta, InvalidDeltaTilde, NonPositiveScale
from .noise import NoiseSource

KNOWN_COV = "known"
UNKNOWN_COV = "unknown"

# ledger entry kinds
MECHANISM = "mechanism"
VARIANCE_SUM = "variance_sum"
AVG = "avg"

KNOWN_COV_MAX_EPS = 0.5


@dataclass(frozen=True)
class LedgerEntry:
    epsilon: float
    delta: float
    label: str = ""
    kind: str = MECHANISM

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"ledger epsilon must be positive, got {self.epsilon!r}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"ledger delta must lie in [0, 1), got {self.delta!r}")


@dataclass
class CompositionLedger:
    """Ordered record of the (epsilon, delta) spent by each sub-call."""

    entries: List[LedgerEntry] = field(default_factory=list)

    def record(self, epsilon: float, delta: float, label: str = "", kind: str = MECHANISM) -> None:
        self.entries.append(LedgerEntry(float(epsilon), float(delta), label, kind))

    def __len__(self):
        return len(self.entries)

    def to_list(self) -> list:
        return [{"epsilon": e.epsilon, "delta": e.delta, "label": e.label, "kind": e.kind} for e in self.entries]

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "CompositionLedger":
        ledger = cls()
        for p in pairs:
            ledger.record(*p)
        return ledger

    @classmethod
    def from_json(cls, obj) -> "CompositionLedger":
        """Accept a list of ``[eps, delta]`` pairs or ``{"epsilon", "delta", "count"?}`` objects.

        A top-level object with an ``"entries"`` list is also accepted.
        """
        if isinstance(obj, str):
            obj = json.loads(obj)
        if isinstance(obj, dict):
            obj = obj["entries"]
        ledger = cls()
        for item in obj:
            if isinstance(item, dict):
                for _ in range(int(item.get("count", 1))):
                    ledger.record(item["epsilon"], item.get("delta", 0.0), item.get("label", ""),
                                  item.get("kind", MECHANISM))
            else:
                ledger.record(*item)
        return ledger


@dataclass(frozen=True)
class PrivacyGuarantee:
    """End-to-end (epsilon, delta) with the steps that produced it.

    Unlike ``PrivacyBudget`` this may carry delta = 0 (pure DP) or a
    vacuous delta >= 1.
    """

    epsilon: float
    delta: float
    derivation: tuple = ()

    @property
    def vacuous(self) -> bool:
        return self.delta >= 1

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "derivation": list(self.derivation)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def laplace_noise(scale: float, src: NoiseSource) -> float:
    if not scale > 0:
        raise NonPositiveScale(f"Laplace scale must be positive, got {scale!r}")
    return src.laplace(scale)


def gaussian_mech_scale(sensitivity: float, eps: float, delta: float) -> float:
    """Standard deviation of the Gaussian mechanism for l2-sensitivity ``sensitivity``."""
    if not sensitivity > 0:
        raise NonPositiveScale(f"sensitivity must be positive, got {sensitivity!r}")
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps!r}")
    if not 0 < delta < 1.25:
        raise InvalidDelta(f"delta must lie in (0, 1.25), got {delta!r}")
    return sensitivity * math.sqrt(2 * math.log(1.25 / delta)) / eps


def _entries(ledger) -> Sequence[LedgerEntry]:
    entries = ledger.entries if isinstance(ledger, CompositionLedger) else list(ledger)
    entries = [e if isinstance(e, LedgerEntry) else LedgerEntry(*e) for e in entries]
    if not entries:
        raise EmptyLedger("cannot compose an empty ledger")
    return entries


def compose_basic(ledger) -> PrivacyGuarantee:
    entries = _entries(ledger)
    eps = math.fsum(e.epsilon for e in entries)
    delta = math.fsum(e.delta for e in entries)
    return PrivacyGuarantee(eps, delta, (f"basic composition of {len(entries)} entries",))


def compose_advanced(ledger, delta_tilde: float) -> PrivacyGuarantee:
    entries = _entries(ledger)
    if not 0 < delta_tilde < 1:
        raise InvalidDeltaTilde(f"delta_tilde must lie in (0, 1), got {delta_tilde!r}")
    eps = np.array([e.epsilon for e in entries])
    drift = math.fsum(np.expm1(eps) * eps / (np.exp(eps) + 1))
    spread = math.sqrt(math.fsum(eps**2) * math.log(1 / delta_tilde))
    delta = delta_tilde + math.fsum(e.delta for e in entries)
    return PrivacyGuarantee(
        drift + spread, delta,
        (f"advanced composition of {len(entries)} entries at delta_tilde={delta_tilde:g}",),
    )


def friendlycore_amplify(eps_inner: float, delta_inner: float) -> PrivacyGuarantee:
    """Guarantee of running a friendly-DP algorithm on the BasicFilter core."""
    if not eps_inner > 0:
        raise ValueError(f"inner epsilon must be positive, got {eps_inner!r}")
    if not 0 < delta_inner < 1:
        raise ValueError(f"inner delta must lie in (0, 1), got {delta_inner!r}")
    growth = math.expm1(eps_inner)
    return PrivacyGuarantee(
        2 * growth * eps_inner,
        2 * math.exp(eps_inner + 2 * growth) * delta_inner,
        (f"filter amplification of ({eps_inner:g}, {delta_inner:g})",),
    )


def known_cov_guarantee(epsilon: float, delta: float) -> PrivacyGuarantee:
    """(21 eps, e^10 delta) for one run of the re-scaled averaging estimator.

    Raises ``EpsilonOutOfRange`` (with the formula value attached) when
    eps > 1/2, where the constants are not proven.
    """
    inner = friendlycore_amplify(3 * epsilon, 2 * delta) if epsilon > 0 and 2 * delta < 1 else None
    steps = ["lines 4-7 are friendly (3 eps, 2 delta)-DP"]
    if inner is not None:
        steps.append(f"amplified: ({inner.epsilon:.6g}, {inner.delta:.6g})")
    steps.append("reported as (21 eps, e^10 delta)")
    out = PrivacyGuarantee(21 * epsilon, math.exp(10) * delta, tuple(steps))
    if epsilon > KNOWN_COV_MAX_EPS:
        raise EpsilonOutOfRange(
            f"the (21 eps, e^10 delta) guarantee is only proven for eps <= 1/2, got eps={epsilon}", out
        )
    return out


def _block(entries: Sequence[LedgerEntry], delta_tilde: Optional[float]) -> PrivacyGuarantee:
    basic = compose_basic(entries)
    if len(entries) < 2:
        return basic
    if delta_tilde is None:
        delta_tilde = min(math.fsum(e.delta for e in entries), 0.5) or 1e-9
    adv = compose_advanced(entries, delta_tilde)
    return adv if adv.epsilon < basic.epsilon else basic


def report_total_privacy(algorithm: str, inputs, delta_tilde: Optional[float] = None,
                         avg_constants: bool = False) -> PrivacyGuarantee:
    """Map the budgets an estimator was run with to an end-to-end guarantee.

    ``algorithm="known"``: ``inputs`` is the PrivacyBudget (or (eps, delta))
    of one re-scaled averaging run.

    ``algorithm="unknown"``: ``inputs`` is the ledger of sub-calls. Entries of
    kind ``variance_sum`` are composed as one block, taking the tighter of
    basic and advanced composition; the block and every other entry are then
    summed. Averaging entries count at their nominal budget unless
    ``avg_constants`` is set, in which case each is first mapped through the
    (21 eps, e^10 delta) known-covariance guarantee.
    """
    if algorithm == KNOWN_COV:
        eps, delta = (inputs.epsilon, inputs.delta) if hasattr(inputs, "epsilon") else inputs
        return known_cov_guarantee(eps, delta)
    if algorithm != UNKNOWN_COV:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    entries = _entries(inputs)
    steps = []
    parts = []
    block = [e for e in entries if e.kind == VARIANCE_SUM]
    if block:
        g = _block(block, delta_tilde)
        parts.append((g.epsilon, g.delta))
        steps.append(f"{len(block)} per-coordinate variance sums -> ({g.epsilon:.6g}, {g.delta:.6g}) via {g.derivation[0]}")
    for e in entries:
        if e.kind == VARIANCE_SUM:
            continue
        if e.kind == AVG and avg_constants:
            g = known_cov_guarantee(e.epsilon, e.delta)
            parts.append((g.epsilon, g.delta))
            steps.append(f"{e.label or 'avg'}: ({e.epsilon:g}, {e.delta:g}) -> ({g.epsilon:.6g}, {g.delta:.6g})")
        else:
            parts.append((e.epsilon, e.delta))
            steps.append(f"{e.label or e.kind}: ({e.epsilon:g}, {e.delta:g})")
    eps = math.fsum(p[0] for p in parts)
    delta = math.fsum(p[1] for p in parts)
    steps.append(f"basic composition of {len(parts)} parts")
    return PrivacyGuarantee(eps, delta, tuple(steps))
