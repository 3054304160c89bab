"""Noise norm of M = Sigma against M = I on a power-law spectrum.

Example: python3 scripts/noise_ratio.py --d 4096 --n 2000 --trials 50
"""

import argparse
import math

import numpy as np

from anisodp.harness import KNOWN_ANISO, KNOWN_FOLKLORE, TrialConfig, run_trials
from anisodp.rescaled import default_lambda
from anisodp.synth import GroundTruth, SpectrumSpec
from anisodp.types import CovarianceModel, PrivacyBudget


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=4096)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--exponent", type=float, default=2.0)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    truth = GroundTruth.from_spectrum(SpectrumSpec.powerlaw(args.d, args.exponent))
    S = truth.Sigma
    lam_a = default_lambda(S, S, args.n, 0.05)
    lam_f = default_lambda(S, CovarianceModel.identity(args.d), args.n, 0.05)
    closed = lam_a / lam_f * math.sqrt(np.sqrt(S.diagonal()).sum() / args.d)
    norms = {}
    for est in (KNOWN_ANISO, KNOWN_FOLKLORE):
        cfg = TrialConfig(truth, est, args.n, PrivacyBudget(1.0, 1e-6), trials=args.trials, workers=args.workers)
        norms[est] = float(np.mean(run_trials(cfg).noise_norms))
        print(f"{est}: mean noise norm {norms[est]:.5g}")
    print(f"ratio {norms[KNOWN_ANISO] / norms[KNOWN_FOLKLORE]:.4f} (closed form {closed:.4f})")


if __name__ == "__main__":
    main()
