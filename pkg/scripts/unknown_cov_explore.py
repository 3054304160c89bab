"""Abort rate and median error of the unknown-covariance pipeline across n and k.

Example: python3 scripts/unknown_cov_explore.py --d 256 --n 16080 64000 256000 --k 1 4 --trials 10
"""

import argparse
import json

from anisodp.harness import KNOWN_ANISO, UNKNOWN, TrialConfig, run_trials
from anisodp.synth import GroundTruth, SpectrumSpec
from anisodp.types import PrivacyBudget


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=256)
    ap.add_argument("--n", type=int, nargs="+", default=[16080, 64000])
    ap.add_argument("--k", type=int, nargs="*", default=[], help="k overrides; the default k is always included")
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=1e-6)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--baseline", action="store_true", help="also run the known-covariance estimator")
    ap.add_argument("--seed", type=int, default=808)
    args = ap.parse_args()
    truth = GroundTruth.from_spectrum(SpectrumSpec.expdecay(args.d))
    budget = PrivacyBudget(args.eps, args.delta)
    for n in args.n:
        for k in [None] + args.k:
            m = run_trials(TrialConfig(truth, UNKNOWN, n, budget, trials=args.trials, master_seed=args.seed, k=k))
            reasons = {}
            for r in m.records:
                if r.aborted:
                    key = r.abort_reason.split("[")[0].split(":")[0]
                    reasons[key] = reasons.get(key, 0) + 1
            row = {"n": n, "k": k or "default", "aborts": m.abort_count, "median": m.median_error(), "why": reasons}
            print(json.dumps(row))
        if args.baseline:
            m = run_trials(TrialConfig(truth, KNOWN_ANISO, n, budget, trials=args.trials, master_seed=args.seed,
                                       m_floor=1e-10))
            print(json.dumps({"n": n, "estimator": KNOWN_ANISO, "median": m.median_error()}))


if __name__ == "__main__":
    main()
