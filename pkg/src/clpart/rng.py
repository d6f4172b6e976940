"""Deterministic 64-bit random streams.

The generator is SplitMix64 (Steele/Lea/Flood mixing constants): one 64-bit
state, golden-gamma increment, avalanche finalizer.  It is tiny, has no
platform or library dependence, and is exactly reproducible, which is the
whole point here: every randomized result in this package is a pure function
of (seed, trial index).

Per-trial substreams are derived by mixing seed and index through the
finalizer separately and XORing, so trial streams are decorrelated and can be
consumed independently (and in parallel) without coordination.
"""

from __future__ import annotations

from fractions import Fraction

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer (avalanching bijection on 64-bit words)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seedable stream of uniform 64-bit words."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def next_fraction(self) -> Fraction:
        """The next draw as the exact rational k / 2^64 in [0, 1)."""
        return Fraction(self.next_u64(), 1 << 64)


def substream(seed: int, index: int) -> SplitMix64:
    """Independent stream for trial ``index`` under master ``seed``."""
    if index < 0:
        raise ValueError("index must be >= 0")
    return SplitMix64(mix64(seed) ^ mix64((index + 1) * GOLDEN_GAMMA))
