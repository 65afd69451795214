"""SplitMix64 generator and the derived draws used for reproducible experiments.

Everything random in this package flows through this generator so that splits
and synthetic datasets are bit-reproducible from a single 64-bit seed, on any
platform. The derivations are pinned exactly:

* bounded ints reduce ``next_uint64() % n`` (bias is irrelevant at our ranges,
  reproducibility is not),
* unit floats take the top 53 bits, shifted into (0, 1],
* gaussians use Box-Muller cosine form, consuming two raw draws per value,
* shuffles are modern Fisher-Yates, swapping index i (from n-1 down to 1)
  with ``next_below(i + 1)``.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """The SplitMix64 pseudorandom generator (64-bit state, 64-bit output)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform-ish integer in [0, n)."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        return self.next_uint64() % n

    def next_int(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in the inclusive range [lo, hi]."""
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_below(hi - lo + 1)

    def next_unit(self) -> float:
        """Float in (0, 1], with 53 bits of resolution."""
        return ((self.next_uint64() >> 11) + 1) * 2.0**-53

    def next_gaussian(self) -> float:
        """Standard normal draw (Box-Muller, cosine branch; two raw draws)."""
        u1 = self.next_unit()
        u2 = self.next_unit()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def shuffled_indices(n: int, rng: SplitMix64) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by *rng*."""
    indices = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    return indices
