"""Success rate of the private variance stage of the unknown-covariance pipeline.

Draws the group-variance grid directly (sigma^2 chi^2_ell / ell), so half sizes
in the millions stay cheap, and reports how often every stable histogram
releases a bucket.

Example: python3 scripts/variance_stage_probe.py --d 256 --n-half 32000 128000 640000 2000000
"""

import argparse
import math

from anisodp.errors import HistogramBot
from anisodp.noise import NoiseSource, derive_seed
from anisodp.synth import SpectrumSpec, make_spectrum, sample_variance_estimates
from anisodp.types import PrivacyBudget
from anisodp.unknown import default_ell, default_k
from anisodp.variance import find_kth_largest_variance, top_var, variance_sum


def variance_stage(V, k, budget, src):
    R = find_kth_largest_variance(V, k, budget, src)
    top = sorted(top_var(V, R / 8, k, budget, src))
    sub = PrivacyBudget(budget.epsilon / math.sqrt(k * math.log(1 / budget.delta)), budget.delta / k)
    for i in top:
        variance_sum(V, [i], sub, src)
    variance_sum(V, [i for i in range(V.d) if i not in set(top)], budget, src)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=256)
    ap.add_argument("--n-half", type=int, nargs="+", default=[32000, 128000, 640000, 2000000])
    ap.add_argument("--k", type=int, nargs="*", default=[1])
    ap.add_argument("--trials", type=int, default=20)
    args = ap.parse_args()
    budget = PrivacyBudget(1.0, 1e-6)
    v = make_spectrum(SpectrumSpec.expdecay(args.d)).diagonal()
    ell = default_ell(args.d)
    for n in args.n_half:
        m = n // (2 * ell)
        for k in [default_k(n, args.d, budget, 0.05)] + args.k:
            ok = 0
            for t in range(args.trials):
                V = sample_variance_estimates(v, m, ell, derive_seed(909, t, 0))
                try:
                    variance_stage(V, k, budget, NoiseSource(derive_seed(909, t, 1)))
                    ok += 1
                except HistogramBot:
                    pass
            print(f"n_half={n} m={m} k={k}: {ok}/{args.trials} passed", flush=True)


if __name__ == "__main__":
    main()
