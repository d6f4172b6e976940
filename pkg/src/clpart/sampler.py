"""Markov-chain generator for the limiting p-Sylow partition measure.

The chain builds a partition column by column.  The first column height is
drawn from the parts-count distribution P(a); given the current column height
a, the next height b <= a is drawn from the exact kernel

    K(a, b) = prod_{i=1}^a (1-1/p^i)
              / ( p^(binom(b+1,2)) * prod_{i=1}^b (1-1/p^i)
                  * prod_{j=1}^{floor((a-b)/2)} (1-1/p^2j) ).

Heights stop the first time they hit 0; the sampled partition is the
conjugate of the column-height sequence.

All selection is inverse-CDF over exact rational cumulative weights, compared
against a uniform 64-bit draw k read as the rational k/2^64.  Cumulative
weights are precompiled to integer thresholds, so a draw is integer
comparisons only; the per-value probability differs from the exact mass by
less than 2^-63 (the grid resolution), which is far below anything a
desk-scale trial count can resolve.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .measures import MassValue, PartitionDistribution, lower_qpoch, even_qpoch, pmf_parts
from .partitions import Partition
from .qseries import BoundedReal, as_fraction, fraction_str
from .rng import substream

# No realistic sample can reach this many columns (each positive height is
# left in finite expected time); hitting it means a bug, not bad luck.
MAX_COLUMNS = 10**4

DEFAULT_CUTOFF = Fraction(1, 10**12)


@dataclass(frozen=True)
class SamplerConfig:
    p: int
    seed: int
    initial_tail_cutoff: Fraction = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be a prime >= 2")
        cutoff = as_fraction(self.initial_tail_cutoff)
        if not (0 < cutoff < 1):
            raise ValueError("initial_tail_cutoff must lie in (0, 1)")
        object.__setattr__(self, "initial_tail_cutoff", cutoff)


def kernel(a: int, b: int, p: int) -> Fraction:
    """Exact transition probability K(a, b) for 0 <= b <= a."""
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if not (0 <= b <= a):
        raise ValueError(f"need 0 <= b <= a, got a={a}, b={b}")
    num = lower_qpoch(p, a)
    den = (
        Fraction(p) ** (b * (b + 1) // 2)
        * lower_qpoch(p, b)
        * even_qpoch(p, (a - b) // 2)
    )
    return num / den


def _thresholds(cumulative: list[Fraction]) -> tuple[int, ...]:
    """Integer cutpoints for inverse-CDF selection on a 64-bit draw.

    Value i is selected when k < T[i] (and k >= T[i-1]); T[i] is the ceiling
    of cumulative[i] * 2^64, so each slice has probability within 2^-64 of
    its exact mass, and an exact cumulative of 1 maps to 2^64 (never missed).
    """
    out = []
    for c in cumulative:
        num = c.numerator << 64
        out.append(-((-num) // c.denominator) if num else 0)
    return tuple(out)


@dataclass(frozen=True)
class KernelRow:
    """One row of the kernel: exact masses for b = 0..a, plus selection data."""

    a: int
    p: int
    masses: tuple[Fraction, ...]
    thresholds: tuple[int, ...]


@lru_cache(maxsize=None)
def kernel_row(a: int, p: int) -> KernelRow:
    """Row K(a, 0..a); construction asserts the exact row sum is 1."""
    masses = tuple(kernel(a, b, p) for b in range(a + 1))
    total = sum(masses)
    if total != 1:
        raise ArithmeticError(f"kernel row a={a}, p={p} sums to {total}, not 1")
    cumulative = []
    acc = Fraction(0)
    for m in masses:
        acc += m
        cumulative.append(acc)
    return KernelRow(a=a, p=p, masses=masses, thresholds=_thresholds(cumulative))


def initial_column_distribution(p: int, cutoff=DEFAULT_CUTOFF) -> list[tuple[int, MassValue]]:
    """Parts-count masses P(0), P(1), ... until the remaining tail is below cutoff.

    The tail past height B is bounded by geometric domination:
    P(b+1)/P(b) = p^-(b+1) / (1 - p^-(b+1)) <= rho for all b >= B, so
    sum_{b>B} P(b) <= P(B) * rho / (1 - rho) with rho evaluated at B.
    The bound is taken on rational parts (the odd constant is < 1).
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    cutoff = as_fraction(cutoff)
    if not (0 < cutoff < 1):
        raise ValueError("cutoff must lie in (0, 1)")
    values = [pmf_parts(0, p)]
    b = 0
    while True:
        rho = Fraction(1, p ** (b + 1)) / (1 - Fraction(1, p ** (b + 1)))
        if rho < 1 and values[b].rational * rho / (1 - rho) <= cutoff:
            return [(a, values[a]) for a in range(b + 1)]
        b += 1
        values.append(pmf_parts(b, p))


@dataclass(frozen=True)
class _InitialSelector:
    heights: tuple[int, ...]
    thresholds: tuple[int, ...]
    tail_bound: Fraction  # documented per-sample selection bias bound


@lru_cache(maxsize=None)
def _initial_selector(p: int, cutoff: Fraction) -> _InitialSelector:
    """Compile the (truncated) first-column distribution to thresholds.

    Masses share the odd-product constant, so selection uses the rational
    parts directly: cumulative weights are divided by W + tail, where W is
    the retained weight and tail the rational tail bound.  Draws landing past
    the last cumulative weight (a slice of relative width <= tail/W) fold
    into the largest retained height, which is where the residual mass lives.
    """
    entries = initial_column_distribution(p, cutoff)
    weights = [mass.rational for _, mass in entries]
    b_last = entries[-1][0]
    rho = Fraction(1, p ** (b_last + 1)) / (1 - Fraction(1, p ** (b_last + 1)))
    tail = weights[-1] * rho / (1 - rho)
    denom = sum(weights) + tail
    cumulative = []
    acc = Fraction(0)
    for w in weights:
        acc += w
        cumulative.append(acc / denom)
    return _InitialSelector(
        heights=tuple(a for a, _ in entries),
        thresholds=_thresholds(cumulative),
        tail_bound=tail,
    )


def _select(thresholds: tuple[int, ...], k: int) -> int:
    return bisect_right(thresholds, k)


def sample_partition(config: SamplerConfig, stream) -> Partition:
    """Draw one partition; ``stream`` supplies uniform 64-bit words."""
    init = _initial_selector(config.p, config.initial_tail_cutoff)
    idx = _select(init.thresholds, stream.next_u64())
    height = init.heights[idx] if idx < len(init.heights) else init.heights[-1]
    columns = []
    while height > 0:
        columns.append(height)
        if len(columns) > MAX_COLUMNS:
            raise RuntimeError(f"column count exceeded {MAX_COLUMNS}; aborting")
        row = kernel_row(height, config.p)
        height = _select(row.thresholds, stream.next_u64())
    return Partition(columns).conjugate()


def empirical_distribution(config: SamplerConfig, trials: int) -> PartitionDistribution:
    """Frequency table over ``trials`` independent samples.

    Trial t draws from substream(seed, t), so the table is a pure function of
    (seed, trials) and merges of disjoint trial ranges agree with a single
    run.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts: dict[Partition, int] = {}
    for t in range(trials):
        lam = sample_partition(config, substream(config.seed, t))
        counts[lam] = counts.get(lam, 0) + 1
    entries = {lam: MassValue(Fraction(c, trials)) for lam, c in counts.items()}
    return PartitionDistribution(
        p=config.p,
        measure="empirical",
        params={
            "trials": trials,
            "seed": config.seed,
            "cutoff": fraction_str(config.initial_tail_cutoff),
        },
        entries=entries,
        tail_mass=BoundedReal.exact(0),
        counts=counts,
    )
