"""SplitMix64, the portable generator behind synthetic datasets.

SplitMix64 (Steele, Lea & Flood 2014; the ``SplittableRandom`` mixer) keeps a
single 64-bit counter ``s``.  Each draw does::

    s = s + 0x9E3779B97F4A7C15            (mod 2**64)
    z = s
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2**64)
    return z ^ (z >> 31)

Derived draws, all built only from integer arithmetic plus ``log``/``cos``
for the normal case:

* ``uniform()``: ``(next() >> 11) * 2**-53``, a double in [0, 1).
* ``integer(a, b)``: ``a + floor(uniform() * (b - a + 1))``.
* ``normal(mu, sigma)``: Box-Muller on two uniforms ``u1, u2``:
  ``mu + sigma * sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
"""

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return lo + int(self.uniform() * (hi - lo + 1))

    def normal(self, mean: float = 0.0, stddev: float = 1.0) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return mean + stddev * math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
