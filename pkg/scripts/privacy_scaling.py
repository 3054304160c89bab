"""Log-log slope of the privacy noise norm against n.

Example: python3 scripts/privacy_scaling.py --d 512 --n 1000 2000 4000 8000 --csv scaling.csv
"""

import argparse

import numpy as np

from anisodp.harness import KNOWN_ANISO, TrialConfig, fit_loglog_slope, sweep, sweep_csv
from anisodp.synth import GroundTruth, SpectrumSpec
from anisodp.types import PrivacyBudget


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=512)
    ap.add_argument("--spikes", type=int, default=8)
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv")
    args = ap.parse_args()
    truth = GroundTruth.from_spectrum(SpectrumSpec.spike(args.d, args.spikes))
    grid = [TrialConfig(truth, KNOWN_ANISO, n, PrivacyBudget(1.0, 1e-6), trials=args.trials, master_seed=404,
                        workers=args.workers) for n in args.n]
    rows = sweep(grid)
    norms = [float(np.mean(m.noise_norms)) for _, m in rows]
    for n, v in zip(args.n, norms):
        print(f"n={n}: mean noise norm {v:.5g}")
    print(f"slope {fit_loglog_slope(args.n, norms):.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(sweep_csv(rows))


if __name__ == "__main__":
    main()
