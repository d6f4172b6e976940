"""Probability measures on partitions, exact up to one shared constant.

Every mass is stored as (constant tag) x (exact rational part).  The tag is
either the trivial constant 1, the odd product prod_{i odd}(1 - p^-i), or the
u-deformed normalizer (1 - u/p) prod_{i>=3 odd}(1 - u^2 p^-i).  Keeping the
constant symbolic means equality between different formulas for the same
measure is an exact rational comparison; the constant is multiplied in (as a
rigorous enclosure) only at the output boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .partitions import ENUMERATION_CAP, Partition, enumerate_partitions, _descending
from .qseries import (
    DEFAULT_TOLERANCE,
    BoundedReal,
    as_fraction,
    deformed_constant,
    finite_qpoch,
    fraction_str,
    odd_constant,
)

CONST_EXACT = "exact"
CONST_ODD = "odd"
CONST_DEFORMED = "deformed"


@dataclass(frozen=True)
class MassValue:
    """A probability mass: ``constant`` tag times an exact rational part."""

    rational: Fraction
    constant: str = CONST_EXACT
    p: int | None = None
    u: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "rational", as_fraction(self.rational))
        if self.constant not in (CONST_EXACT, CONST_ODD, CONST_DEFORMED):
            raise ValueError(f"unknown constant tag {self.constant!r}")
        if self.constant != CONST_EXACT and self.p is None:
            raise ValueError("tagged masses need p")
        if self.constant == CONST_DEFORMED and self.u is None:
            raise ValueError("deformed masses need u")

    def constant_enclosure(self, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
        if self.constant == CONST_EXACT:
            return BoundedReal.exact(1)
        if self.constant == CONST_ODD:
            return odd_constant(self.p, tolerance)
        return deformed_constant(self.p, self.u, tolerance)

    def enclosure(self, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
        """The numeric mass, as constant enclosure times the rational part."""
        return self.constant_enclosure(tolerance) * self.rational


@lru_cache(maxsize=None)
def lower_qpoch(p: int, k: int) -> Fraction:
    """(1-1/p)(1-1/p^2)...(1-1/p^k), cached; the workhorse finite product."""
    return finite_qpoch(Fraction(1, p), Fraction(1, p), k)


@lru_cache(maxsize=None)
def even_qpoch(p: int, k: int) -> Fraction:
    """(1-1/p^2)(1-1/p^4)...(1-1/p^(2k)), cached."""
    q2 = Fraction(1, p * p)
    return finite_qpoch(q2, q2, k)


@lru_cache(maxsize=None)
def upper_qpoch(p: int, k: int) -> Fraction:
    """(1+1/p)(1+1/p^2)...(1+1/p^k), cached."""
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= 1 + Fraction(1, p**i)
    return out


def _d_lambda_cached(lam: Partition, p: int) -> Fraction:
    out = Fraction(1)
    for mult in lam.multiplicities().values():
        out *= even_qpoch(p, mult // 2)
    return out


def _check_p(p: int):
    if p < 2:
        raise ValueError("p must be a prime >= 2")


def pmf_via_conjugate(lam: Partition, p: int) -> MassValue:
    """Mass of lam under the limiting p-Sylow measure, in the conjugate form.

    With mu the conjugate of lam (and mu_{i+1} = 0 past the last column):

        odd-constant / ( p^(sum_i mu_i(mu_i+1)/2)
                         * prod_{i=1}^{lam_1} prod_{j=1}^{floor((mu_i-mu_{i+1})/2)} (1 - p^-2j) )
    """
    _check_p(p)
    mu = lam.conjugate().parts
    exponent = sum(m * (m + 1) // 2 for m in mu)
    denom = Fraction(p) ** exponent
    for i, m in enumerate(mu):
        m_next = mu[i + 1] if i + 1 < len(mu) else 0
        denom *= even_qpoch(p, (m - m_next) // 2)
    return MassValue(1 / denom, CONST_ODD, p=p)


def pmf(lam: Partition, p: int) -> MassValue:
    """Mass of lam under the limiting p-Sylow measure (multiplicity form).

        odd-constant / ( p^(n(lam) + |lam|) * d_lambda(lam, p) )

    Equal, term by term, to pmf_via_conjugate; this form is the cheaper one.
    """
    _check_p(p)
    denom = Fraction(p) ** (lam.n_stat() + lam.size) * _d_lambda_cached(lam, p)
    return MassValue(1 / denom, CONST_ODD, p=p)


def pmf_parts(a: int, p: int) -> MassValue:
    """Chance that a partition drawn from the measure has exactly ``a`` parts:

        odd-constant / ( p^(a(a+1)/2) * (1-1/p)...(1-1/p^a) )
    """
    _check_p(p)
    if a < 0:
        raise ValueError("a must be >= 0")
    denom = Fraction(p) ** (a * (a + 1) // 2) * lower_qpoch(p, a)
    return MassValue(1 / denom, CONST_ODD, p=p)


def pmf_size(n: int, p: int) -> MassValue:
    """Chance that a partition drawn from the measure has size n:

        odd-constant * p^-n * sum_{j even, 0 <= j <= n} p^-(j/2) / ((1-1/p^2)...(1-1/p^j))
    """
    _check_p(p)
    if n < 0:
        raise ValueError("n must be >= 0")
    total = Fraction(0)
    for k in range(n // 2 + 1):  # k = j/2
        total += Fraction(1, p**k) / even_qpoch(p, k)
    return MassValue(total / Fraction(p) ** n, CONST_ODD, p=p)


def pmf_deformed(lam: Partition, p: int, u) -> MassValue:
    """Mass of lam under the u-deformed measure, 0 < u < p:

        deformed-constant * u^|lam| / ( p^(n(lam)+|lam|) * d_lambda(lam, p) )

    At u = 1 the rational part coincides with pmf().
    """
    _check_p(p)
    u = as_fraction(u)
    if not (0 < u < p):
        raise ValueError(f"u must satisfy 0 < u < p, got {u}")
    rational = u**lam.size / (
        Fraction(p) ** (lam.n_stat() + lam.size) * _d_lambda_cached(lam, p)
    )
    return MassValue(rational, CONST_DEFORMED, p=p, u=u)


def pmf_truncated(lam: Partition, p: int, r: int) -> Fraction:
    """Mass of lam under the at-most-r-parts measure; fully exact, no constant:

        [ (1+1/p)...(1+1/p^r) ]^-1
        * 1 / ( p^(n(lam)+|lam|) * d_lambda(lam, p) )
        * (1-1/p)...(1-1/p^r) / ( (1-1/p)...(1-1/p^(r-l(lam))) )
    """
    _check_p(p)
    if r < 1:
        raise ValueError("r must be >= 1")
    if lam.length > r:
        raise ValueError(f"partition has {lam.length} parts, more than r={r}")
    body = 1 / (Fraction(p) ** (lam.n_stat() + lam.size) * _d_lambda_cached(lam, p))
    trailing = lower_qpoch(p, r) / lower_qpoch(p, r - lam.length)
    return body * trailing / upper_qpoch(p, r)


def _parts_recursion_product_form(p: int, a_max: int) -> list[Fraction]:
    """Rational parts of P(0..a_max) from the finite-product recursion:

        (1-1/p)...(1-1/p^r) * sum_{s=0}^r P~(s) / ((1-1/p)...(1-1/p^(r-s)))
            = (1+1/p)...(1+1/p^r),

    solved inductively from P~(0) = 1.
    """
    vals = [Fraction(1)]
    for r in range(1, a_max + 1):
        acc = upper_qpoch(p, r) / lower_qpoch(p, r)
        for s in range(r):
            acc -= vals[s] / lower_qpoch(p, r - s)
        vals.append(acc)
    return vals


def _parts_recursion_kernel_form(p: int, a_max: int) -> list[Fraction]:
    """Rational parts of P(0..a_max) from the chain-consistency recursion:

        sum_{b<=a} P~(b) / ( p^(binom(a+1,2)) P~(a) (1/p^2)_{floor((a-b)/2)} ) = 1,

    solved inductively from P~(0) = 1.
    """
    vals = [Fraction(1)]
    for a in range(1, a_max + 1):
        acc = Fraction(0)
        for b in range(a):
            acc += vals[b] / even_qpoch(p, (a - b) // 2)
        vals.append(acc / (Fraction(p) ** (a * (a + 1) // 2) - 1))
    return vals


def solve_parts_recursion(p: int, a_max: int) -> list[MassValue]:
    """P(0..a_max) computed independently from both recursions.

    The two solutions must agree exactly (and both match the closed form
    pmf_parts); any discrepancy is an arithmetic bug, so it raises.
    """
    _check_p(p)
    if a_max < 0:
        raise ValueError("a_max must be >= 0")
    from_product = _parts_recursion_product_form(p, a_max)
    from_kernel = _parts_recursion_kernel_form(p, a_max)
    if from_product != from_kernel:
        raise ArithmeticError(
            f"parts recursions disagree at p={p}: {from_product} vs {from_kernel}"
        )
    return [MassValue(v, CONST_ODD, p=p) for v in from_product]


@lru_cache(maxsize=None)
def inverse_odd_constant_upper(p: int) -> Fraction:
    """A rational upper bound on 1 / prod_{i odd}(1 - p^-i), for tail bounds.

    The reciprocal appears because the full size-generating sum
    sum_k p^-k / (1-1/p^2)...(1-1/p^(2k)) converges to exactly that value
    (the classical Euler series/product identity at s=1/p, q=1/p^2).
    """
    return 1 / odd_constant(p, Fraction(1, 10**6)).lower


def size_tail_bound(p: int, max_size: int) -> Fraction:
    """Exact rational bound on the measure's mass at sizes > max_size.

    Prob(|lam| = n) = odd-constant * p^-n * S_n with S_n increasing to
    1/odd-constant, so Prob(|lam| = n) <= p^-n and the tail sums to at most
    p^-max_size / (p - 1).
    """
    _check_p(p)
    return Fraction(1, p**max_size * (p - 1))


def deformed_tail_bound(p: int, u, max_size: int) -> Fraction:
    """Rational bound on deformed-measure mass at sizes > max_size.

    Mass at size n is at most (u/p)^n * (deformed constant) / odd-constant
    <= (u/p)^n * inverse_odd_constant_upper(p), summed geometrically.
    """
    u = as_fraction(u)
    ratio = u / p
    return inverse_odd_constant_upper(p) * ratio ** (max_size + 1) / (1 - ratio)


def truncated_tail_bound(p: int, max_size: int) -> Fraction:
    """Rational bound on truncated-measure mass at sizes > max_size; the
    normalizer and trailing ratio are both <= 1, so the size bound applies
    scaled by the same inverse-constant sum."""
    return inverse_odd_constant_upper(p) * size_tail_bound(p, max_size)


@dataclass
class PartitionDistribution:
    """A table partition -> mass, plus the mass provably outside the table.

    ``tail_mass`` is a rigorous enclosure of the un-enumerated mass computed
    from analytic bounds, never from 1 - (table total): normalization checks
    stay meaningful.  ``counts`` is set on empirical tables only.
    """

    p: int
    measure: str
    params: dict = field(default_factory=dict)
    entries: dict[Partition, MassValue] = field(default_factory=dict)
    tail_mass: BoundedReal = field(default_factory=lambda: BoundedReal.exact(0))
    counts: dict[Partition, int] | None = None

    def sorted_partitions(self) -> list[Partition]:
        return sorted(self.entries, key=Partition.sort_key)

    def total_enclosure(self, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
        """Enclosure of the summed entry masses (tail not included).

        Entries sharing a constant tag are summed exactly first, so the
        enclosure is as tight as the constant's own enclosure.
        """
        groups: dict[tuple, Fraction] = {}
        rep: dict[tuple, MassValue] = {}
        for mass in self.entries.values():
            key = (mass.constant, mass.p, mass.u)
            groups[key] = groups.get(key, Fraction(0)) + mass.rational
            rep[key] = mass
        total = BoundedReal.exact(0)
        for key, rational in groups.items():
            total = total + rep[key].constant_enclosure(tolerance) * rational
        return total

    def normalization_enclosure(self, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
        return self.total_enclosure(tolerance) + self.tail_mass

    def to_json_dict(self, tolerance=DEFAULT_TOLERANCE) -> dict:
        entries = []
        for lam in self.sorted_partitions():
            enc = self.entries[lam].enclosure(tolerance)
            row = {"partition": str(lam), "mid": fraction_str(enc.mid),
                   "rad": fraction_str(enc.rad)}
            if self.counts is not None:
                row["count"] = self.counts.get(lam, 0)
            entries.append(row)
        return {
            "p": self.p,
            "measure": self.measure,
            "params": dict(self.params),
            "entries": entries,
            "tail": self.tail_mass.to_json(),
        }

    def to_csv_rows(self, tolerance=DEFAULT_TOLERANCE) -> list[list[str]]:
        rows = [["partition", "midpoint", "radius"]]
        for lam in self.sorted_partitions():
            enc = self.entries[lam].enclosure(tolerance)
            rows.append([str(lam), repr(float(enc.mid)), repr(float(enc.rad))])
        return rows


def tabulate(p: int, max_size: int, measure: str = "cl", *, u=None, r=None) -> PartitionDistribution:
    """Exact mass table over all partitions of size <= max_size.

    ``measure`` selects the base measure ("cl"), the u-deformed family
    ("deformed", needs u), or the at-most-r-parts family ("truncated",
    needs r).  The tail enclosure covers everything outside the table.
    """
    _check_p(p)
    if max_size < 0:
        raise ValueError("max_size must be >= 0")
    if max_size > ENUMERATION_CAP:
        raise ValueError(f"max_size={max_size} exceeds the enumeration cap {ENUMERATION_CAP}")

    entries: dict[Partition, MassValue] = {}
    if measure == "cl":
        if u is not None or r is not None:
            raise ValueError("u/r apply only to the deformed/truncated measures")
        params = {}
        for n in range(max_size + 1):
            for lam in enumerate_partitions(n):
                entries[lam] = pmf(lam, p)
        tail = BoundedReal.from_endpoints(0, size_tail_bound(p, max_size))
    elif measure == "deformed":
        if u is None:
            raise ValueError("the deformed measure needs u")
        u = as_fraction(u)
        params = {"u": fraction_str(u)}
        for n in range(max_size + 1):
            for lam in enumerate_partitions(n):
                entries[lam] = pmf_deformed(lam, p, u)
        tail = BoundedReal.from_endpoints(0, deformed_tail_bound(p, u, max_size))
    elif measure == "truncated":
        if r is None:
            raise ValueError("the truncated measure needs r")
        if r < 1:
            raise ValueError("r must be >= 1")
        params = {"r": r}
        for n in range(max_size + 1):
            for lam in enumerate_partitions(n):
                if lam.length <= r:
                    entries[lam] = MassValue(pmf_truncated(lam, p, r))
        tail = BoundedReal.from_endpoints(0, truncated_tail_bound(p, max_size))
    else:
        raise ValueError(f"unknown measure {measure!r} (expected cl, deformed, truncated)")

    return PartitionDistribution(p=p, measure=measure, params=params,
                                 entries=entries, tail_mass=tail)


@lru_cache(maxsize=None)
def size_length_layers(p: int, max_size: int) -> dict:
    """(size, parts-count) -> sum of 1 / (p^(n(lam)+|lam|) d_lambda) over that cell.

    One enumeration pass; every generating-sum check and marginal is a cheap
    reweighting of this table.  Works on raw part tuples to keep the pass
    fast.
    """
    _check_p(p)
    if max_size > ENUMERATION_CAP:
        raise ValueError(f"max_size={max_size} exceeds the enumeration cap {ENUMERATION_CAP}")
    layers: dict[tuple[int, int], Fraction] = {}
    for n in range(max_size + 1):
        for parts in _descending(n, n):
            exponent = n
            for i, x in enumerate(parts):
                exponent += i * x
            d = Fraction(1)
            run = 0
            prev = 0
            for x in parts + (0,):
                if x == prev:
                    run += 1
                else:
                    if run >= 2:
                        d *= even_qpoch(p, run // 2)
                    prev, run = x, 1
            key = (n, len(parts))
            term = Fraction(1, p**exponent) / d
            layers[key] = layers.get(key, Fraction(0)) + term
    return layers


def deformed_series_check(p: int, u, max_size: int):
    """Truncated generating-sum check for the u-deformation:

        sum_lam u^|lam| / (p^(n+|lam|) d_lam)  ==  1 / deformed-constant.

    Returns (partial_lhs, rhs_enclosure, tail_bound, agree) where the partial
    sum runs over |lam| <= max_size and agree asserts containment within
    rhs radius plus the geometric tail bound.
    """
    _check_p(p)
    u = as_fraction(u)
    if not (0 < u < p):
        raise ValueError(f"u must satisfy 0 < u < p, got {u}")
    layers = size_length_layers(p, max_size)
    partial = Fraction(0)
    for (n, _), value in layers.items():
        partial += u**n * value
    rhs = deformed_constant(p, u, DEFAULT_TOLERANCE).reciprocal()
    ratio = u / p
    tail = inverse_odd_constant_upper(p) * ratio ** (max_size + 1) / (1 - ratio)
    agree = abs(partial - rhs.mid) <= rhs.rad + tail
    return partial, rhs, tail, agree


def truncated_series_check(p: int, r: int, max_size: int):
    """Truncated generating-sum check for the at-most-r-parts family:

        sum_{l(lam) <= r} [body(lam) * trailing(lam)]  ==  (1+1/p)...(1+1/p^r).

    Returns (partial_lhs, rhs_exact, tail_bound, agree); the identity has an
    exact rational right side, so agree asserts
    partial <= rhs <= partial + tail_bound.
    """
    _check_p(p)
    if r < 1:
        raise ValueError("r must be >= 1")
    layers = size_length_layers(p, max_size)
    partial = Fraction(0)
    for (_, length), value in layers.items():
        if length <= r:
            partial += value * lower_qpoch(p, r) / lower_qpoch(p, r - length)
    rhs = upper_qpoch(p, r)
    tail = inverse_odd_constant_upper(p) * size_tail_bound(p, max_size)
    agree = partial <= rhs <= partial + tail
    return partial, rhs, tail, agree
