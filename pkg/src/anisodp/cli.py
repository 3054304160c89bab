"""Command-line frontend.

Exit codes: 0 success, 2 usage error, 3 data error, 4 abort (estimate verbs).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import secrets
import sys
from typing import List, Optional

import numpy as np

from .errors import AnisoDPError, EpsilonOutOfRange
from .harness import TrialConfig, sweep, sweep_csv, sweep_json
from .mechanisms import KNOWN_COV, UNKNOWN_COV, CompositionLedger, compose_advanced, compose_basic, report_total_privacy
from .noise import NoiseSource, ZeroNoise
from .rescaled import known_cov_config, private_rescaled_avg
from .types import PrivacyBudget, read_covariance, read_csv
from .unknown import UnknownCovConfig, estimate_mean_unknown_cov

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_ABORT = 4

NOT_PRIVATE = "NOT PRIVATE"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text):
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _unit(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="anisodp", description="Differentially private mean estimation for anisotropic data.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common_estimate(q):
        q.add_argument("--data", required=True, help="CSV file, one sample per row")
        q.add_argument("--eps", type=_positive, required=True)
        q.add_argument("--delta", type=_unit, required=True, help="no default on purpose")
        q.add_argument("--beta", type=_unit, default=0.05)
        q.add_argument("--seed", type=int, help="noise seed; drawn at random and recorded when omitted")
        q.add_argument("--unsafe-zero-noise", action="store_true", help="testing only: replace all noise by zero")
        q.add_argument("--out", help="write JSON here instead of stdout")

    q = sub.add_parser("estimate-known", help="re-scaled averaging with a known covariance")
    common_estimate(q)
    q.add_argument("--cov", required=True, help='JSON {"kind": full|diagonal|spherical, "data": ..., "d"?}')
    q.add_argument("--folklore", action="store_true", help="use M = I instead of M = Sigma")
    q.add_argument("--lambda", dest="lam", type=_positive)

    q = sub.add_parser("estimate-unknown", help="pipeline for an unknown diagonal covariance")
    common_estimate(q)
    q.add_argument("--k", type=int)
    q.add_argument("--ell", type=int)

    for verb in ("simulate", "sweep"):
        q = sub.add_parser(verb, help=f"{verb} from a JSON manifest")
        q.add_argument("--config", required=True)
        q.add_argument("--workers", type=int)
        q.add_argument("--unsafe-zero-noise", action="store_true")
        q.add_argument("--out", help="write JSON here instead of stdout")
        q.add_argument("--csv", help="also write the aggregate CSV here")

    q = sub.add_parser("account", help="compose a ledger of (epsilon, delta) entries")
    q.add_argument("--ledger", required=True)
    q.add_argument("--advanced", action="store_true")
    q.add_argument("--delta-tilde", type=_unit)
    q.add_argument("--algorithm", choices=(KNOWN_COV, UNKNOWN_COV),
                   help="map the ledger through an estimator's end-to-end accounting")
    q.add_argument("--avg-constants", action="store_true",
                   help="with --algorithm unknown, charge averaging entries (21 eps, e^10 delta)")
    q.add_argument("--out")
    return p


def _emit(obj: dict, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, default=_default)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _source(args):
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    return seed, (ZeroNoise(seed) if args.unsafe_zero_noise else NoiseSource(seed))


def _stamp(out: dict, unsafe: bool) -> dict:
    if unsafe:
        out["warning"] = NOT_PRIVATE
    return out


def _privacy(algorithm, inputs, delta_tilde=None, avg_constants=False) -> dict:
    try:
        return report_total_privacy(algorithm, inputs, delta_tilde, avg_constants).to_dict()
    except EpsilonOutOfRange as exc:
        rep = exc.guarantee.to_dict()
        rep["proven"] = False
        rep["note"] = str(exc)
        return rep


def _estimate_known(args) -> int:
    X = read_csv(args.data)
    Sigma = read_covariance(args.cov, d=X.d)
    budget = PrivacyBudget(args.eps, args.delta)
    seed, src = _source(args)
    cfg = known_cov_config(Sigma, X.n, budget, args.beta, folklore=args.folklore, lam=args.lam)
    res = private_rescaled_avg(X, cfg, src)
    out = {
        "outcome": "abort" if res.aborted else "mean",
        "mean": None if res.aborted else res.mean,
        "params": {
            "verb": "estimate-known", "data": args.data, "cov": args.cov, "n": X.n, "d": X.d,
            "epsilon": args.eps, "delta": args.delta, "beta": args.beta, "folklore": args.folklore,
            "lambda": cfg.lam, "lambda_default": args.lam is None, "seed": seed,
            "unsafe_zero_noise": args.unsafe_zero_noise,
        },
        "privacy": _privacy(KNOWN_COV, budget),
    }
    _emit(_stamp(out, args.unsafe_zero_noise), args.out)
    return EXIT_ABORT if res.aborted else EXIT_OK


def _estimate_unknown(args) -> int:
    X = read_csv(args.data)
    budget = PrivacyBudget(args.eps, args.delta)
    seed, src = _source(args)
    res = estimate_mean_unknown_cov(X, UnknownCovConfig(budget, args.beta, args.k, args.ell), src)
    out = res.to_dict()
    out["params"] = {
        "verb": "estimate-unknown", "data": args.data, "n_total": X.n, "d": X.d, "epsilon": args.eps,
        "delta": args.delta, "beta": args.beta, "k": args.k, "ell": args.ell, "seed": seed,
        "unsafe_zero_noise": args.unsafe_zero_noise,
    }
    if len(res.ledger):
        out["privacy"] = _privacy(UNKNOWN_COV, res.ledger)
        out["privacy_avg_constants"] = _privacy(UNKNOWN_COV, res.ledger, avg_constants=True)
    _emit(_stamp(out, args.unsafe_zero_noise), args.out)
    return EXIT_ABORT if res.aborted else EXIT_OK


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def manifest_configs(manifest) -> List[TrialConfig]:
    """Expand a manifest into trial configurations.

    Accepted shapes: a single config object, ``{"configs": [...]}``, or
    ``{"base": {...}, "grid": {"key": [values], ...}}`` (Cartesian product
    over the grid keys, applied on top of ``base``).
    """
    if isinstance(manifest, list):
        raw = manifest
    elif "configs" in manifest:
        raw = manifest["configs"]
    elif "grid" in manifest:
        base = manifest.get("base", {})
        keys = list(manifest["grid"])
        raw = [dict(base, **dict(zip(keys, combo))) for combo in itertools.product(*manifest["grid"].values())]
    else:
        raw = [manifest]
    return [TrialConfig.from_dict(r) for r in raw]


def _simulate(args) -> int:
    try:
        configs = manifest_configs(_load_json(args.config))
    except (KeyError, TypeError) as exc:
        raise AnisoDPError(f"bad manifest: {exc!r}") from None
    if not configs:
        raise AnisoDPError("manifest lists no configurations")
    if args.verb == "simulate" and len(configs) != 1:
        raise UsageError("simulate takes exactly one configuration; use sweep for grids")
    overrides = {}
    if args.workers:
        overrides["workers"] = args.workers
    if args.unsafe_zero_noise:
        overrides["zero_noise"] = True
    if overrides:
        configs = [TrialConfig(**{**c.__dict__, **overrides}) for c in configs]
    rows = sweep(configs)
    unsafe = any(c.zero_noise for c in configs)
    if args.csv:
        text = sweep_csv(rows)
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(text if not unsafe else f"# {NOT_PRIVATE}\n{text}")
    out = {"verb": args.verb, "results": json.loads(sweep_json(rows))}
    _emit(_stamp(out, unsafe), args.out)
    return EXIT_OK


def _account(args) -> int:
    ledger = CompositionLedger.from_json(_load_json(args.ledger))
    if args.algorithm == UNKNOWN_COV:
        rep = _privacy(UNKNOWN_COV, ledger, args.delta_tilde, args.avg_constants)
    elif args.algorithm == KNOWN_COV:
        if len(ledger) != 1:
            raise AnisoDPError("known-covariance accounting takes exactly one ledger entry")
        e = ledger.entries[0]
        rep = _privacy(KNOWN_COV, (e.epsilon, e.delta))
    elif args.advanced:
        if args.delta_tilde is None:
            raise UsageError("--advanced needs --delta-tilde")
        rep = compose_advanced(ledger, args.delta_tilde).to_dict()
    else:
        rep = compose_basic(ledger).to_dict()
    rep["params"] = {"verb": "account", "ledger": args.ledger, "entries": len(ledger), "advanced": args.advanced,
                     "delta_tilde": args.delta_tilde, "algorithm": args.algorithm}
    _emit(rep, args.out)
    return EXIT_OK


HANDLERS = {
    "estimate-known": _estimate_known,
    "estimate-unknown": _estimate_unknown,
    "simulate": _simulate,
    "sweep": _simulate,
    "account": _account,
}


def run_cli(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return HANDLERS[args.verb](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (AnisoDPError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
