"""Exact q-product arithmetic and rigorously enclosed infinite products.

Finite products are plain ``Fraction`` values.  Infinite products are
returned as midpoint/radius enclosures (:class:`BoundedReal`) so downstream
checks can assert containment instead of approximate equality.  Tail bounds
all come from the elementary inequality

    prod(1 - a_i) >= 1 - sum(a_i)    for a_i in (0, 1),

applied to the omitted factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .partitions import Partition

# Hard cap on adaptive truncation depth, so a pathological tolerance fails
# loudly instead of looping.
MAX_PRODUCT_FACTORS = 10**5

DEFAULT_TOLERANCE = Fraction(1, 10**30)


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, and "a/b" strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    """Render as "num/den" (denominator always explicit, for stable JSON)."""
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class BoundedReal:
    """A real number known to lie in [mid - rad, mid + rad].

    Arithmetic produces enclosures of the exact results; operations never
    silently drop error.  Rationals embed exactly with rad = 0.
    """

    mid: Fraction
    rad: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "mid", as_fraction(self.mid))
        object.__setattr__(self, "rad", as_fraction(self.rad))
        if self.rad < 0:
            raise ValueError("radius must be >= 0")

    @classmethod
    def exact(cls, x) -> "BoundedReal":
        return cls(as_fraction(x), Fraction(0))

    @classmethod
    def from_endpoints(cls, lo, hi) -> "BoundedReal":
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo > hi:
            raise ValueError("lower endpoint above upper endpoint")
        return cls((lo + hi) / 2, (hi - lo) / 2)

    @property
    def lower(self) -> Fraction:
        return self.mid - self.rad

    @property
    def upper(self) -> Fraction:
        return self.mid + self.rad

    def contains(self, x) -> bool:
        x = as_fraction(x)
        return self.lower <= x <= self.upper

    def __add__(self, other):
        if isinstance(other, BoundedReal):
            return BoundedReal(self.mid + other.mid, self.rad + other.rad)
        return BoundedReal(self.mid + as_fraction(other), self.rad)

    __radd__ = __add__

    def __neg__(self):
        return BoundedReal(-self.mid, self.rad)

    def __sub__(self, other):
        return self + (-other if isinstance(other, BoundedReal) else -as_fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BoundedReal):
            products = [
                a * b
                for a in (self.lower, self.upper)
                for b in (other.lower, other.upper)
            ]
            return BoundedReal.from_endpoints(min(products), max(products))
        c = as_fraction(other)
        return BoundedReal(self.mid * c, self.rad * abs(c))

    __rmul__ = __mul__

    def reciprocal(self) -> "BoundedReal":
        if self.lower <= 0:
            raise ValueError("reciprocal requires a strictly positive enclosure")
        return BoundedReal.from_endpoints(1 / self.upper, 1 / self.lower)

    def abs_enclosure(self) -> "BoundedReal":
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        return BoundedReal.from_endpoints(0, max(-self.lower, self.upper))

    def to_float(self) -> float:
        return float(self.mid)

    def to_json(self) -> dict:
        return {"mid": fraction_str(self.mid), "rad": fraction_str(self.rad)}

    def __str__(self):
        return f"{float(self.mid)!r} +/- {float(self.rad)!r}"


def finite_qpoch(x, q, j: int) -> Fraction:
    """The finite q-Pochhammer product prod_{k=1}^{j} (1 - x q^(k-1)); j=0 gives 1."""
    if j < 0:
        raise ValueError("j must be >= 0")
    x, q = as_fraction(x), as_fraction(q)
    out = Fraction(1)
    power = Fraction(1)
    for _ in range(j):
        out *= 1 - x * power
        power *= q
    return out


def d_lambda(lam: Partition, p: int) -> Fraction:
    """prod_{i>=1} prod_{j=1}^{floor(m_i/2)} (1 - p^(-2j)), the symmetry weight of lam."""
    if p < 2:
        raise ValueError("p must be >= 2")
    q2 = Fraction(1, p * p)
    out = Fraction(1)
    for mult in lam.multiplicities().values():
        out *= finite_qpoch(q2, q2, mult // 2)
    return out


@lru_cache(maxsize=None)
def odd_constant(p: int, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
    """Enclosure of prod over odd i of (1 - p^-i), to the requested radius.

    The partial product up to odd i < M multiplies a tail in
    [1 - sum_{i odd >= M} p^-i, 1]; the geometric tail sum is
    p^-M * p^2/(p^2 - 1).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    tol = as_fraction(tolerance)
    if tol <= 0:
        raise ValueError("tolerance must be > 0")
    partial = Fraction(1)
    i = 1
    for _ in range(MAX_PRODUCT_FACTORS):
        tail = Fraction(p * p, p * p - 1) / Fraction(p) ** i
        if tail < 1:
            lo, hi = partial * (1 - tail), partial
            if hi - lo <= 2 * tol:
                return BoundedReal.from_endpoints(lo, hi)
        partial *= 1 - Fraction(1, p**i)
        i += 2
    raise ArithmeticError(
        f"enclosure did not reach radius {tol} within {MAX_PRODUCT_FACTORS} factors"
    )


@lru_cache(maxsize=None)
def deformed_constant(p: int, u, tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
    """Enclosure of (1 - u/p) * prod_{i>=3 odd} (1 - u^2 p^-i), for 0 < u < p.

    This is the normalizing constant of the u-deformed measure; at u = 1 it
    equals odd_constant(p).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    u = as_fraction(u)
    if not (0 < u < p):
        raise ValueError(f"u must satisfy 0 < u < p, got {u}")
    tol = as_fraction(tolerance)
    if tol <= 0:
        raise ValueError("tolerance must be > 0")
    prefactor = 1 - u / p
    partial = Fraction(1)
    i = 3
    for _ in range(MAX_PRODUCT_FACTORS):
        tail = u * u * Fraction(p * p, p * p - 1) / Fraction(p) ** i
        if tail < 1:
            lo, hi = partial * (1 - tail), partial
            if prefactor * (hi - lo) <= 2 * tol:
                return BoundedReal.from_endpoints(prefactor * lo, prefactor * hi)
        partial *= 1 - u * u / Fraction(p) ** i
        i += 2
    raise ArithmeticError(
        f"enclosure did not reach radius {tol} within {MAX_PRODUCT_FACTORS} factors"
    )


def gaussian_binomial(r: int, s: int, q) -> Fraction:
    """The q-binomial coefficient [r choose s]_q as a ratio of finite q-factorials."""
    if not (0 <= s <= r):
        raise ValueError("need 0 <= s <= r")
    q = as_fraction(q)
    num = finite_qpoch(q, q, r)
    den = finite_qpoch(q, q, s) * finite_qpoch(q, q, r - s)
    if den == 0:
        raise ValueError(f"q-factorial vanishes at q={q}; q must avoid roots of unity")
    return num / den


class EulerCheck(NamedTuple):
    lhs: Fraction
    rhs: BoundedReal
    agree: bool
    truncation_bound: Fraction


def verify_euler_identity(s, q, terms: int) -> EulerCheck:
    """Check 1 + sum_{m>=1} s^m / ((1-q)...(1-q^m)) = prod_{m>=0} (1 - s q^m)^-1.

    The left side is the exact partial sum through ``terms``; the right side
    is a rigorous enclosure of the infinite product's reciprocal.  ``agree``
    asserts |lhs - rhs.mid| <= rhs.rad + truncation_bound, where the bound
    dominates the omitted left-side tail: successive terms shrink by at least
    the ratio s / (1 - q^(terms+2)), so the tail is at most the first omitted
    term times the geometric sum of that ratio.
    """
    s, q = as_fraction(s), as_fraction(q)
    if not (0 < q < 1 and 0 < s < 1):
        raise ValueError("need 0 < s < 1 and 0 < q < 1")
    if terms < 1:
        raise ValueError("terms must be >= 1")

    lhs = Fraction(1)
    denom = Fraction(1)
    s_power = Fraction(1)
    q_power = Fraction(1)
    for m in range(1, terms + 1):
        q_power *= q
        denom *= 1 - q_power
        s_power *= s
        lhs += s_power / denom

    first_omitted = s_power * s / (denom * (1 - q_power * q))
    ratio = s / (1 - q_power * q * q)
    if ratio >= 1:
        raise ValueError("terms too small for a convergent tail bound; increase terms")
    truncation_bound = first_omitted / (1 - ratio)

    rhs = _euler_product_reciprocal(s, q, min(DEFAULT_TOLERANCE, truncation_bound))
    agree = abs(lhs - rhs.mid) <= rhs.rad + truncation_bound
    return EulerCheck(lhs, rhs, agree, truncation_bound)


def _euler_product_reciprocal(s: Fraction, q: Fraction, tolerance: Fraction) -> BoundedReal:
    """Enclosure of prod_{m>=0} (1 - s q^m)^-1 with radius <= tolerance."""
    partial = Fraction(1)
    q_power = Fraction(1)  # q^m for the next factor
    for _ in range(MAX_PRODUCT_FACTORS):
        tail = s * q_power / (1 - q)
        if tail < 1:
            lo, hi = partial * (1 - tail), partial
            enclosure = BoundedReal.from_endpoints(lo, hi).reciprocal()
            if enclosure.rad <= tolerance:
                return enclosure
        partial *= 1 - s * q_power
        q_power *= q
    raise ArithmeticError(
        f"enclosure did not reach radius {tolerance} within {MAX_PRODUCT_FACTORS} factors"
    )


class QBinomialCheck(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    agree: bool


def verify_qbinomial(r: int, q, x) -> QBinomialCheck:
    """Check sum_{s=0}^r [r choose s]_q q^(s(s+1)/2) x^s = (1+xq)(1+xq^2)...(1+xq^r).

    Both sides are exact rationals; ``agree`` is exact equality.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    q, x = as_fraction(q), as_fraction(x)
    lhs = Fraction(0)
    for s in range(r + 1):
        lhs += gaussian_binomial(r, s, q) * q ** (s * (s + 1) // 2) * x**s
    rhs = Fraction(1)
    for k in range(1, r + 1):
        rhs *= 1 + x * q**k
    return QBinomialCheck(lhs, rhs, lhs == rhs)
