"""Injectable randomness.

Every randomized routine in the package takes a ``NoiseSource``. Two sources
constructed with the same seed produce bit-identical streams. ``ZeroNoise``
replaces every draw by its deterministic centre so the algorithms can be
checked against hand-computed outputs; it is never private.
"""

from __future__ import annotations

import numpy as np

from .errors import FractionalProbability, NonPositiveScale

_TWO53 = float(2**53)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Child seed for ``(master_seed, *keys)``; independent across keys."""
    seq = np.random.SeedSequence(entropy=int(master_seed) % 2**64, spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class NoiseSource:
    """Seeded stream of uniform, Laplace, Gaussian and Bernoulli draws.

    Uniforms lie on the open grid ``(i + 1/2) / 2**53`` so the inverse-CDF
    Laplace transform never hits an infinite endpoint. Each Laplace or
    Bernoulli draw consumes exactly one uniform.
    """

    private = True

    def __init__(self, seed: int):
        self.seed = int(seed) % 2**64
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size=None):
        raw = self._rng.integers(0, 2**53, size=size, dtype=np.int64)
        return (raw + 0.5) / _TWO53

    def laplace(self, scale: float, size=None):
        if not scale > 0:
            raise NonPositiveScale(f"Laplace scale must be positive, got {scale!r}")
        u = self.uniform(size)
        # inverse CDF, split at the median to keep both tails accurate
        lower = u < 0.5
        out = np.where(lower, np.log(2.0 * np.where(lower, u, 0.25)),
                       -np.log(2.0 * np.where(lower, 0.75, 1.0 - u)))
        out = scale * out
        return float(out) if size is None else out

    def gaussian(self, size=None):
        out = self._rng.standard_normal(size)
        return float(out) if size is None else out

    def bernoulli(self, p):
        """Draw ``u < p`` for each probability; p = 0 never fires and p = 1 always does."""
        p_arr = np.asarray(p, dtype=float)
        u = self.uniform(p_arr.shape if p_arr.ndim else None)
        out = np.asarray(u) < p_arr
        return bool(out) if p_arr.ndim == 0 else out

    def spawn(self, *keys: int) -> "NoiseSource":
        return type(self)(derive_seed(self.seed, *keys))


class ZeroNoise(NoiseSource):
    """Deterministic stand-in: Laplace and Gaussian draws are 0.

    Bernoulli draws only accept p in {0, 1}; anything fractional raises
    ``FractionalProbability`` so zero-noise tests never hide a coin flip.
    Uniform draws return the median 0.5.
    """

    private = False

    def __init__(self, seed: int = 0):
        super().__init__(seed)

    def uniform(self, size=None):
        return 0.5 if size is None else np.full(size, 0.5)

    def laplace(self, scale: float, size=None):
        if not scale > 0:
            raise NonPositiveScale(f"Laplace scale must be positive, got {scale!r}")
        return 0.0 if size is None else np.zeros(size)

    def gaussian(self, size=None):
        return 0.0 if size is None else np.zeros(size)

    def bernoulli(self, p):
        p_arr = np.asarray(p, dtype=float)
        if not np.all((p_arr == 0.0) | (p_arr == 1.0)):
            raise FractionalProbability("ZeroNoise only supports Bernoulli(p) with p in {0, 1}")
        out = p_arr == 1.0
        return bool(out) if p_arr.ndim == 0 else out
