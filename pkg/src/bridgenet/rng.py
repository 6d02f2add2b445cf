"""splitmix64 pseudo-random generator.

Chosen because the whole algorithm fits in a handful of integer operations
with fixed constants, so any implementation on any platform produces the
same draw sequence for the same seed. All stochastic behaviour in this
package (target placement, target motion, derived scenario seeds) flows
through this generator.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit generator: state += golden gamma, output = mixed state.

    Draw conventions used throughout the package:
      * ``next_float()`` is ``next_u64() / 2**64``, in [0, 1).
      * ``next_below(n)`` is ``next_u64() % n``.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return self.next_u64() / 2.0**64

    def next_below(self, n: int) -> int:
        return self.next_u64() % n


def derive_seed(base_seed: int, index: int) -> int:
    """Per-scenario seed: one splitmix64 step of (base_seed XOR index).

    The mixing function is a bijection on 64-bit integers, so distinct
    indices under the same base seed always yield distinct seeds.
    """
    return SplitMix64(base_seed ^ index).next_u64()
