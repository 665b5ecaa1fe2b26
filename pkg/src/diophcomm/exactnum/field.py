"""Exact arithmetic in multiquadratic fields Q(sqrt d1, sqrt d2, ...).

An element is a finite sum ``sum_r c_r * sqrt(r)`` over distinct squarefree
radicands ``r >= 1`` with rational coefficients.  Square roots of distinct
squarefree integers are linearly independent over Q, so an element is zero
exactly when every coefficient is zero.  Signs are decided exactly by
splitting off one prime at a time and comparing squares.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

from .intervals import Interval, sqrt_interval

__all__ = ["Quad", "squarefree_split", "prime_factors"]


@lru_cache(maxsize=4096)
def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of ``n >= 1`` in increasing order."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(k, r)`` with ``n = k*k*r`` and ``r`` squarefree."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    k, r = 1, 1
    m = n
    d = 2
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        k *= d ** (e // 2)
        if e % 2:
            r *= d
        d += 1 if d == 2 else 2
    r *= m
    return k, r


def _mul_radicands(a: int, b: int) -> tuple[int, int]:
    # sqrt(a)*sqrt(b) = g*sqrt((a/g)(b/g)) for squarefree a, b
    g = gcd(a, b)
    return g, (a // g) * (b // g)


class Quad:
    """Immutable element of a multiquadratic field."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms: dict[int, Fraction] = {r: c for r, c in (terms or {}).items() if c}

    @classmethod
    def rational(cls, q) -> "Quad":
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, n: int) -> "Quad":
        k, r = squarefree_split(n)
        return cls({r: Fraction(k)})

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(r == 1 for r in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not rational")
        return self.terms.get(1, Fraction(0))

    def radicands(self) -> tuple[int, ...]:
        return tuple(sorted(self.terms))

    def key(self) -> tuple:
        return tuple(sorted(self.terms.items()))

    # arithmetic
    def __add__(self, other: "Quad") -> "Quad":
        t = dict(self.terms)
        for r, c in other.terms.items():
            t[r] = t.get(r, 0) + c
        return Quad(t)

    def __neg__(self) -> "Quad":
        return Quad({r: -c for r, c in self.terms.items()})

    def __sub__(self, other: "Quad") -> "Quad":
        return self + (-other)

    def __mul__(self, other: "Quad") -> "Quad":
        t: dict[int, Fraction] = {}
        for r1, c1 in self.terms.items():
            for r2, c2 in other.terms.items():
                k, r = _mul_radicands(r1, r2)
                t[r] = t.get(r, 0) + c1 * c2 * k
        return Quad(t)

    def scale(self, q) -> "Quad":
        q = Fraction(q)
        return Quad({r: c * q for r, c in self.terms.items()})

    def _split(self, p: int) -> tuple["Quad", "Quad"]:
        # self = u + v*sqrt(p), neither u nor v involving p
        u, v = {}, {}
        for r, c in self.terms.items():
            if r % p:
                u[r] = c
            else:
                v[r // p] = c
        return Quad(u), Quad(v)

    def _top_prime(self) -> int | None:
        ps = [p for r in self.terms for p in prime_factors(r)]
        return max(ps) if ps else None

    def inverse(self) -> "Quad":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        p = self._top_prime()
        if p is None:
            return Quad.rational(1 / self.terms[1])
        u, v = self._split(p)
        # 1/(u + v sqrt p) = (u - v sqrt p)/(u^2 - p v^2)
        norm = u * u - (v * v).scale(p)
        conj = u - v * Quad({p: Fraction(1)})
        return conj * norm.inverse()

    def __truediv__(self, other: "Quad") -> "Quad":
        return self * other.inverse()

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        if not self.terms:
            return 0
        iv = self.interval(64)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        return self._exact_sign()

    def _exact_sign(self) -> int:
        if not self.terms:
            return 0
        p = self._top_prime()
        if p is None:
            return 1 if self.terms[1] > 0 else -1
        u, v = self._split(p)
        su, sv = u._exact_sign(), v._exact_sign()
        if su == 0 or su == sv:
            return sv if su == 0 else su
        if sv == 0:
            return su
        # opposite signs: |u| vs |v| sqrt p
        d = (u * u - (v * v).scale(p))._exact_sign()
        return su * d

    def interval(self, prec: int) -> Interval:
        acc = Interval.exact(0, prec)
        for r, c in self.terms.items():
            cv = Interval.from_fraction(c, prec)
            acc = acc + (cv if r == 1 else cv * sqrt_interval(r, prec))
        return acc

    def __float__(self) -> float:
        return float(self.interval(80).midpoint())

    def __repr__(self) -> str:
        if not self.terms:
            return "Quad(0)"
        parts = [str(c) if r == 1 else f"{c}*sqrt{r}" for r, c in sorted(self.terms.items())]
        return "Quad(" + " + ".join(parts) + ")"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Quad) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.key())
