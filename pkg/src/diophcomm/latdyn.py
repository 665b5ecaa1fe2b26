"""Diagonal-flow orbits of unimodular lattices and their escape statistics.

The lattice at time ``t`` is ``g_t u_xi Z^{n+1}`` with
``g_t = diag(e^{nt}, e^{-t}, ..., e^{-t})``; the integer vector ``(p, q)``
maps to ``(e^{nt}(p + q.xi), e^{-t} q_1, ..., e^{-t} q_n)``.  Norms are sup
norms.  Exponentials are enclosed by interval arithmetic, so every
comparison is certified or raises ``PrecisionCapError``.
"""

from __future__ import annotations

import math
import threading
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .exactnum import ExactReal, PrecisionCapError, as_real, get_precision_cap
from .exactnum.diophantine import _quotients
from .exactnum.intervals import Interval
from .exactnum.search import (
    certified_argmin,
    check_work,
    form_error_bound,
    half_box_chunks,
    nearest_int_distance,
)
from .linforms import _dot, _nearest_p

__all__ = [
    "ScaledExp",
    "OrbitLattice",
    "ShortestVector",
    "EscapeRecord",
    "ZVerdict",
    "shortest_sup_vector",
    "escape_set",
    "z_membership",
    "dani_consistency",
    "diophantine_side",
]

_iv_lock = threading.Lock()


def _exp_interval(x: Fraction, prec: int) -> Interval:
    """Enclosure of ``e**x`` at ``prec`` bits."""
    if x == 0:
        return Interval.exact(1, prec)
    with _iv_lock:
        ctx = mpmath.iv
        old = ctx.prec
        ctx.prec = prec + 20
        try:
            v = ctx.exp(ctx.mpf(x.numerator) / x.denominator)
            a, b = v._mpi_
        finally:
            ctx.prec = old
    # raw mpf tuples (sign, mantissa, exponent, bitcount); e**x > 0
    lo = Fraction(int(a[1])) * Fraction(2) ** a[2]
    hi = Fraction(int(b[1])) * Fraction(2) ** b[2]
    scale = 1 << prec
    return Interval(math.floor(lo * scale), math.ceil(hi * scale), prec)


def _precisions():
    p, cap = 64, get_precision_cap()
    while p < cap:
        yield p
        p *= 2
    yield cap


@dataclass(frozen=True)
class ScaledExp:
    """The real ``coef * e**(k*t)`` with ``coef >= 0`` exact and ``t`` rational."""

    coef: ExactReal
    k: int
    t: Fraction

    def is_zero(self) -> bool:
        return self.coef.is_zero()

    def interval(self, prec: int) -> Interval:
        return self.coef.interval(prec) * _exp_interval(self.k * self.t, prec)

    def __float__(self) -> float:
        return float(self.coef) * math.exp(self.k * float(self.t))

    def bounds(self, prec: int = 64) -> tuple[float, float]:
        iv = self.interval(prec)
        return math.nextafter(float(iv.lower()), -math.inf), math.nextafter(float(iv.upper()), math.inf)

    def cmp(self, other: "ScaledExp") -> int:
        """Certified sign of ``self - other`` (both at the same time ``t``)."""
        if self.k == other.k or self.t == 0:
            return (self.coef - other.coef).sign()
        if self.coef.is_zero() or other.coef.is_zero():
            return int(not self.coef.is_zero()) - int(not other.coef.is_zero())
        for prec in _precisions():
            d = self.interval(prec) - other.interval(prec)
            if d.lo > 0:
                return 1
            if d.hi < 0:
                return -1
        raise PrecisionCapError("norm comparison not certified")

    def __lt__(self, other: "ScaledExp") -> bool:
        return self.cmp(other) < 0


def _const(x: ExactReal, t: Fraction) -> ScaledExp:
    return ScaledExp(x, 0, t)


@dataclass(frozen=True)
class OrbitLattice:
    n: int
    xi: tuple[ExactReal, ...]
    t: Fraction

    def __post_init__(self):
        if not 1 <= self.n <= 3 or len(self.xi) != self.n:
            raise ValueError("need 1 <= n <= 3 and len(xi) == n")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @classmethod
    def build(cls, xi: Sequence, t) -> "OrbitLattice":
        return cls(len(xi), tuple(as_real(x) for x in xi), Fraction(t))

    @property
    def scaling_exponents(self) -> tuple[int, ...]:
        return (self.n,) + (-1,) * self.n

    def determinant(self) -> Fraction:
        """Exact determinant: unitriangular ``u_xi`` times ``e**(t * sum of exponents)``."""
        total = sum(self.scaling_exponents) * self.t
        if total != 0:
            raise AssertionError("scaling exponents must cancel")
        return Fraction(1)

    def basis_float(self) -> np.ndarray:
        """Float basis matrix (columns are images of the standard basis)."""
        u = np.eye(self.n + 1)
        u[0, 1:] = [float(x) for x in self.xi]
        g = np.diag([math.exp(e * float(self.t)) for e in self.scaling_exponents])
        return g @ u

    def vector(self, p: int, q: Sequence[int]) -> tuple[ScaledExp, ...]:
        head = ScaledExp(abs(_dot(q, self.xi) + p), self.n, self.t)
        return (head,) + tuple(ScaledExp(ExactReal.from_fraction(abs(qi)), -1, self.t) for qi in q)


def _max(a: ScaledExp, b: ScaledExp) -> ScaledExp:
    return a if b.cmp(a) <= 0 else b


@dataclass(frozen=True)
class ShortestVector:
    p: int
    q: tuple[int, ...]
    norm: ScaledExp
    coverage: str

    def norm_bounds(self, prec: int = 64) -> tuple[float, float]:
        return self.norm.bounds(prec)


def _norm_of(L: OrbitLattice, p: int, q: Sequence[int], head: ExactReal | None = None) -> ScaledExp:
    head = abs(_dot(q, L.xi) + p) if head is None else head
    qmax = max((abs(x) for x in q), default=0)
    return _max(ScaledExp(head, L.n, L.t), ScaledExp(ExactReal.from_fraction(qmax), -1, L.t))


def shortest_sup_vector(L: OrbitLattice) -> ShortestVector:
    """Nonzero lattice vector of least sup norm.

    Minkowski's bound gives a norm of at most 1, so ``|q|_inf <= e**t``.  For
    n = 1 the minimiser is a best approximation, so only convergent
    denominators up to that radius are examined; for n >= 2 the whole half
    box is searched.
    """
    R = math.ceil(math.exp(float(L.t)) * (1 + 1e-12))
    best = (_norm_of(L, 1, (0,) * L.n), 1, (0,) * L.n)
    if L.n == 1:
        qs = {1}
        p2, q2, p1, q1 = 0, 1, 1, 0
        for a in _quotients(L.xi[0]):
            p, q = a * p1 + p2, a * q1 + q2
            if q > R:
                break
            qs.add(q)
            p2, q2, p1, q1 = p1, q1, p, q
        for q in sorted(qs):
            d, p = _nearest_p(L.xi[0] * q)
            cand = _norm_of(L, p, (q,), d)
            if cand < best[0]:
                best = (cand, p, (q,))
        coverage = f"convergent denominators q <= {R} (Minkowski radius e^t)"
    else:
        widths = [R] * L.n
        check_work((2 * R + 1) ** L.n)
        pairs = [x.approx() for x in L.xi]
        xf = np.array([f for f, _ in pairs])
        en, em = math.exp(L.n * float(L.t)), math.exp(-float(L.t))
        err = 2 * (en * form_error_bound(list(xf), [e for _, e in pairs], widths) + 1e-14 * (en + em * R))

        def approx(pts):
            d = nearest_int_distance(pts.astype(np.float64) @ xf)
            return np.maximum(en * d, em * np.abs(pts).max(axis=1))

        def exact(q):
            d, p = _nearest_p(_dot(q, L.xi))
            return _norm_of(L, p, q, d), p

        q, (norm, p) = certified_argmin(widths, approx, err, exact)
        if norm < best[0]:
            best = (norm, p, q)
        coverage = f"half box |q|_inf <= {R} (Minkowski radius e^t)"
    return ShortestVector(best[1], best[2], best[0], coverage)


@dataclass(frozen=True)
class EscapeRecord:
    s: Fraction
    N: int
    eps: ExactReal
    S: tuple[int, ...]
    rows: tuple[dict, ...]
    boundary: int = 0

    @property
    def fraction(self) -> Fraction:
        return Fraction(len(self.S), self.N)


def escape_set(xi: Sequence, n: int, s, N: int, eps) -> EscapeRecord:
    """Times ``l`` in 1..N whose lattice at ``t = s*l`` has a vector shorter than ``eps``."""
    xi = tuple(as_real(x) for x in xi)
    if len(xi) != n:
        raise ValueError("len(xi) must equal n")
    s = Fraction(s)
    eps = as_real(eps)
    members, rows, boundary = [], [], 0
    for ell in range(1, N + 1):
        t = s * ell
        sv = shortest_sup_vector(OrbitLattice(n, xi, t))
        c = sv.norm.cmp(_const(eps, t))
        if c == 0:
            boundary += 1
        if c < 0:
            members.append(ell)
        lo, hi = sv.norm_bounds()
        rows.append({"l": ell, "t": t, "norm_lower": lo, "norm_upper": hi, "in_K": c >= 0, "p": sv.p, "q": sv.q})
    return EscapeRecord(s, N, eps, tuple(members), tuple(rows), boundary)


@dataclass(frozen=True)
class ZVerdict:
    fractions: tuple[Fraction, ...]
    deltas: tuple[Fraction, ...]
    members: tuple[bool, ...]
    sum_condition: bool
    in_delta_grid: bool
    records: tuple[EscapeRecord, ...]


def z_membership(points: Sequence[Sequence], s, N: int, eps, deltas: Sequence) -> ZVerdict:
    """Per-point membership ``|S|/N >= delta_j`` and the joint condition
    ``sum(delta) >= 1 - (m+1)/s`` for ``m`` points."""
    if len(points) != len(deltas):
        raise ValueError("one delta per point")
    s = Fraction(s)
    deltas = tuple(Fraction(d) for d in deltas)
    recs = tuple(escape_set(p, len(p), s, N, eps) for p in points)
    fr = tuple(r.fraction for r in recs)
    members = tuple(f >= d for f, d in zip(fr, deltas))
    m = len(points)
    cond = sum(deltas) >= 1 - Fraction(m + 1) / s
    grid = all(0 <= d < 1 and (d * s).denominator == 1 for d in deltas)
    return ZVerdict(fr, deltas, members, cond, grid and cond, recs)


def diophantine_side(xi: Sequence, n: int, t, eps) -> bool | None:
    """Whether some ``(p, q) != 0`` has ``|p + q.xi| < eps e^{-nt}`` and ``|q|_inf < eps e^t``.

    Returns ``None`` when the answer hinges on a certified equality.
    """
    xi = tuple(as_real(x) for x in xi)
    t = Fraction(t)
    eps = as_real(eps)
    X = ScaledExp(eps, -n, t)
    Y = ScaledExp(eps, 1, t)
    boundary = False

    def strictly_below(a: ScaledExp, b: ScaledExp) -> bool:
        nonlocal boundary
        c = a.cmp(b)
        if c == 0:
            boundary = True
        return c < 0

    one = ExactReal.from_fraction(1)
    if strictly_below(ScaledExp(one, 0, t), X):
        return True
    R = math.floor(float(Y) * (1 + 1e-12)) + 1
    while R > 0 and not strictly_below(ScaledExp(ExactReal.from_fraction(R), 0, t), Y):
        R -= 1
    if R == 0:
        return None if boundary else False
    check_work((2 * R + 1) ** n)
    pairs = [x.approx() for x in xi]
    xf = np.array([f for f, _ in pairs])
    err = form_error_bound(list(xf), [e for _, e in pairs], [R] * n)
    xlim = float(X) * (1 + 1e-9) + err
    for pts in half_box_chunks([R] * n):
        d = nearest_int_distance(pts.astype(np.float64) @ xf)
        for row in pts[d <= xlim]:
            q = tuple(int(v) for v in row)
            dist, _ = _nearest_p(_dot(q, xi))
            if strictly_below(ScaledExp(dist, 0, t), X):
                return True
    return None if boundary else False


def dani_consistency(xi: Sequence, n: int, t, eps) -> bool | None:
    """Compare the lattice test ``lambda_1 < eps`` with the unwound inequalities.

    Returns ``True`` when both sides agree, ``False`` when they disagree, and
    ``None`` for boundary cases decided by a certified equality.
    """
    t = Fraction(t)
    eps = as_real(eps)
    xi = tuple(as_real(x) for x in xi)
    sv = shortest_sup_vector(OrbitLattice(n, xi, t))
    c = sv.norm.cmp(_const(eps, t))
    dio = diophantine_side(xi, n, t, eps)
    if c == 0 or dio is None:
        return None
    return (c < 0) == dio
