"""Continued fractions and one-dimensional Dirichlet approximation."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .real import ExactReal, as_real
from .search import certified_argmin, form_error_bound, nearest_int_distance


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients ``a_0, a_1, ...``; ``terminated`` marks a rational input."""

    partial_quotients: tuple[int, ...]
    terminated: bool

    def convergents(self) -> list[Convergent]:
        return convergents(self.partial_quotients)

    def __iter__(self):
        return iter(self.partial_quotients)

    def __len__(self):
        return len(self.partial_quotients)


def convergents(quotients) -> list[Convergent]:
    out = []
    p2, q2, p1, q1 = 0, 1, 1, 0
    for k, a in enumerate(quotients):
        p, q = a * p1 + p2, a * q1 + q2
        out.append(Convergent(k, p, q))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def _quotients(xi: ExactReal) -> Iterator[int]:
    x = xi
    while True:
        a = x.floor()
        yield a
        frac = x - a
        if frac.is_zero():
            return
        x = frac.reciprocal()


def cf_expand(xi, depth: int) -> CFExpansion:
    """Partial quotients ``a_0..a_depth`` of ``xi``.

    Stops early with ``terminated=True`` when ``xi`` is rational.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    xi = as_real(xi)
    out = []
    gen = _quotients(xi)
    for a in gen:
        out.append(a)
        if len(out) == depth + 1:
            break
    else:
        return CFExpansion(tuple(out), True)
    # a_depth was the last quotient of a rational exactly when the remainder vanishes
    terminated = next(gen, None) is None
    return CFExpansion(tuple(out), terminated)


def _nearest(s: ExactReal) -> tuple[ExactReal, int]:
    # distance from s to the nearest integer, ties to the smaller integer
    fl = s.floor()
    d0 = s - fl
    d1 = (fl + 1) - s
    return (d1, fl + 1) if d1 < d0 else (d0, fl)


def _min_distance(xi: ExactReal, Q: int) -> tuple[int, int, ExactReal]:
    xf, xe = xi.approx()
    err = form_error_bound([xf], [xe], [Q])

    def approx(pts):
        return nearest_int_distance(pts[:, 0] * xf)

    def exact(pt):
        return _nearest(xi * pt[0])

    (q,), (value, p) = certified_argmin([Q], approx, err, exact)
    return p, q, value


def dirichlet_approx(xi, Q: int) -> tuple[int, int]:
    """Pair ``(p, q)`` with ``1 <= q <= Q`` minimising ``|q*xi - p|``.

    Ties go to the smallest ``q``, then the smallest ``p``.  The result
    satisfies ``|xi - p/q| < 1/(q*Q)``.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    p, q, _ = _min_distance(as_real(xi), Q)
    return p, q


def dirichlet_profile(xi, Q: int) -> ExactReal:
    """``Q * min_{1<=q<=Q, p} |q*xi - p|`` as an exact value."""
    if Q < 1:
        raise ValueError("Q must be positive")
    _, _, value = _min_distance(as_real(xi), Q)
    return value * Q


def bad_constant_lower(xi, Q: int) -> ExactReal:
    """``min_{1<=q<=Q, p} q^2 |xi - p/q|``, a finite-depth badness estimate.

    Exact inputs walk the convergents; any value below 1/2 is attained at a
    convergent denominator, so the brute-force pass runs only otherwise.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    xi = as_real(xi)
    if xi.is_exact:
        best = None
        p2, q2, p1, q1 = 0, 1, 1, 0
        for a in _quotients(xi):
            p, q = a * p1 + p2, a * q1 + q2
            if q > Q:
                break
            d, _ = _nearest(xi * q)
            v = d * q
            if best is None or v < best:
                best = v
            if v.is_zero():
                break
            p2, q2, p1, q1 = p1, q1, p, q
        if best is not None and best < Fraction(1, 2):
            return best
    xf, xe = xi.approx()
    base = form_error_bound([xf], [xe], [Q])

    def approx(pts):
        q = pts[:, 0].astype(np.float64)
        return q * nearest_int_distance(q * xf)

    def exact(pt):
        d, _ = _nearest(xi * pt[0])
        return (d * pt[0],)

    _, (value,) = certified_argmin([Q], approx, base * Q * 2, exact)
    return value
