"""Dyadic interval arithmetic on Python integers.

An :class:`Interval` at precision ``prec`` encloses a real in
``[lo / 2**prec, hi / 2**prec]``.  Every operation rounds outward, so the
enclosure is rigorous.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt


def _ceil_shift(x: int, k: int) -> int:
    return -((-x) >> k)


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True, slots=True)
class Interval:
    lo: int
    hi: int
    prec: int

    @classmethod
    def exact(cls, n: int, prec: int) -> "Interval":
        v = n << prec
        return cls(v, v, prec)

    @classmethod
    def from_fraction(cls, q: Fraction, prec: int) -> "Interval":
        num = q.numerator << prec
        return cls(_floor_div(num, q.denominator), _ceil_div(num, q.denominator), prec)

    def __add__(self, o: "Interval") -> "Interval":
        return Interval(self.lo + o.lo, self.hi + o.hi, self.prec)

    def __sub__(self, o: "Interval") -> "Interval":
        return Interval(self.lo - o.hi, self.hi - o.lo, self.prec)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.prec)

    def __mul__(self, o: "Interval") -> "Interval":
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(p) >> self.prec, _ceil_shift(max(p), self.prec), self.prec)

    def scale_int(self, k: int) -> "Interval":
        a, b = self.lo * k, self.hi * k
        return Interval(min(a, b), max(a, b), self.prec)

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def __truediv__(self, o: "Interval") -> "Interval":
        if o.contains_zero():
            raise ZeroDivisionError("divisor interval contains zero")
        s = self.prec
        cands_lo = [_floor_div(a << s, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        cands_hi = [_ceil_div(a << s, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(min(cands_lo), max(cands_hi), s)

    def pow(self, e: int) -> "Interval":
        out = Interval.exact(1, self.prec)
        for _ in range(e):
            out = out * self
        return out

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi), self.prec)

    def lower(self) -> Fraction:
        return Fraction(self.lo, 1 << self.prec)

    def upper(self) -> Fraction:
        return Fraction(self.hi, 1 << self.prec)

    def midpoint(self) -> Fraction:
        return Fraction(self.lo + self.hi, 1 << (self.prec + 1))

    def radius(self) -> Fraction:
        return Fraction(self.hi - self.lo, 1 << (self.prec + 1))


def sqrt_interval(n: int, prec: int) -> Interval:
    s = isqrt(n << (2 * prec))
    hi = s if s * s == (n << (2 * prec)) else s + 1
    return Interval(s, hi, prec)
