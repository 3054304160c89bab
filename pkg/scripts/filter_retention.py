"""Fraction of trials in which the filter keeps every sample, across n.

Example: python3 scripts/filter_retention.py --d 64 --n 100 500 2000 --trials 200
"""

import argparse

from anisodp.filter import FilterParams, basic_filter
from anisodp.noise import NoiseSource, derive_seed
from anisodp.rescaled import default_lambda
from anisodp.synth import GroundTruth, SpectrumSpec, sample_gaussian


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--n", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--beta", type=float, default=0.05)
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()
    truth = GroundTruth.from_spectrum(SpectrumSpec.powerlaw(args.d, 2))
    for n in args.n:
        params = FilterParams.from_matrix(truth.Sigma, default_lambda(truth.Sigma, truth.Sigma, n, args.beta))
        full = dropped = 0
        for t in range(args.trials):
            X = sample_gaussian(truth, n, derive_seed(101, t, 0))
            core = basic_filter(X, params, NoiseSource(derive_seed(101, t, 1)))
            full += core.mask.all()
            dropped += n - core.core_size
        print(f"n={n}: full-core fraction {full / args.trials:.3f}, mean dropped {dropped / args.trials:.2f}")


if __name__ == "__main__":
    main()
