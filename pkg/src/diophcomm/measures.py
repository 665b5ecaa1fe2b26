"""Exact and Monte Carlo probabilities of the sets B_n(Q, k), and totient sums.

``B_1(Q, k)`` is the set of ``xi`` in (0,1) with ``|xi - p/q| >= k/(qQ)`` for
every ``1 <= q <= Q``; its complement is a finite union of open intervals,
merged here with exact rational endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np

from . import _rng
from .exactnum import ExactReal, WorkLimitError
from .exactnum.search import half_box_chunks

__all__ = [
    "IntervalUnion",
    "MCEstimate",
    "b1_excluded_set",
    "exact_b1_measure",
    "union_bound",
    "b1_probability_report",
    "totients",
    "mobius",
    "totient_sum",
    "totient_sum_mobius",
    "scaled_totient_sums",
    "TotientReport",
    "totient_sum_report",
    "AlwaysTrue",
    "B1Event",
    "BnEvent",
    "BPsiEvent",
    "make_event",
    "mc_probability",
]

B1_GUARD = 10**4
TOTIENT_GUARD = 10**6


def _frac(x) -> Fraction:
    if isinstance(x, ExactReal):
        return x.as_fraction()
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint open intervals inside (0, 1)."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    @classmethod
    def merge(cls, raw) -> "IntervalUnion":
        out: list[list[Fraction]] = []
        for a, b in sorted((max(a, Fraction(0)), min(b, Fraction(1))) for a, b in raw):
            if a >= b:
                continue
            # open intervals sharing only an endpoint stay separate
            if out and a < out[-1][1]:
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return cls(tuple((a, b) for a, b in out))


def b1_excluded_set(Q: int, kappa, reduced: bool = True) -> IntervalUnion:
    """The union of ``(p/q - k/(qQ), p/q + k/(qQ))`` over ``q <= Q``, clipped to (0,1)."""
    if not 1 <= Q <= B1_GUARD:
        raise WorkLimitError(f"Q must lie in [1, {B1_GUARD}]")
    k = _frac(kappa)
    if not 0 < k < 1:
        raise ValueError("kappa must lie in (0, 1)")
    raw = []
    for q in range(1, Q + 1):
        r = k / (q * Q)
        for p in range(0, q + 1):
            if reduced and gcd(p, q) != 1:
                continue
            c = Fraction(p, q)
            raw.append((c - r, c + r))
    return IntervalUnion.merge(raw)


def exact_b1_measure(Q: int, kappa) -> Fraction:
    """Exact Lebesgue measure of ``B_1(Q, kappa)`` inside (0, 1)."""
    return 1 - b1_excluded_set(Q, kappa).measure


def totients(N: int) -> np.ndarray:
    """Euler phi(0..N) by sieve (phi(0) = 0)."""
    phi = np.arange(N + 1, dtype=np.int64)
    for p in range(2, N + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


def mobius(N: int) -> np.ndarray:
    """Moebius mu(0..N) by linear sieve (mu(0) = 0)."""
    mu = np.ones(N + 1, dtype=np.int64)
    mu[0] = 0
    is_comp = np.zeros(N + 1, dtype=bool)
    for p in range(2, N + 1):
        if not is_comp[p]:
            is_comp[2 * p::p] = True
            mu[p::p] *= -1
            mu[p * p::p * p] = 0
    return mu


def _lcm_upto(N: int) -> int:
    L = 1
    sieve = np.ones(N + 1, dtype=bool)
    for p in range(2, N + 1):
        if sieve[p]:
            sieve[p * p::p] = False
            pk = p
            while pk * p <= N:
                pk *= p
            L *= pk
    return L


def union_bound(Q: int, kappa) -> Fraction:
    """``(2k/Q) * sum_{q<=Q} phi(q)/q``, the union bound on the excluded measure."""
    return 2 * _frac(kappa) / Q * totient_sum(Q)


def totient_sum(Q: int) -> Fraction:
    """``sum_{q<=Q} phi(q)/q`` exactly, via a common denominator lcm(1..Q)."""
    if not 1 <= Q <= TOTIENT_GUARD:
        raise ValueError(f"Q must lie in [1, {TOTIENT_GUARD}]")
    L = _lcm_upto(Q)
    phi = totients(Q)
    return Fraction(sum(int(phi[q]) * (L // q) for q in range(1, Q + 1)), L)


def totient_sum_mobius(Q: int) -> Fraction:
    """``sum_{d<=Q} mu(d)/d * floor(Q/d)`` exactly."""
    L = _lcm_upto(Q)
    mu = mobius(Q)
    return Fraction(sum(int(mu[d]) * (L // d) * (Q // d) for d in range(1, Q + 1) if mu[d]), L)


def scaled_totient_sums(Qmax: int) -> tuple[int, list[int], list[int]]:
    """Both evaluations of ``L * sum_{q<=Q} phi(q)/q`` for every ``Q <= Qmax``.

    Returns ``(L, direct, moebius)`` with ``L = lcm(1..Qmax)``; entry ``Q-1``
    of each list is the scaled sum at ``Q``.  The Moebius side uses prefix
    sums over blocks of constant ``floor(Q/d)``.
    """
    L = _lcm_upto(Qmax)
    phi = totients(Qmax)
    mu = mobius(Qmax)
    direct, acc = [], 0
    for q in range(1, Qmax + 1):
        acc += int(phi[q]) * (L // q)
        direct.append(acc)
    prefix = [0] * (Qmax + 1)
    for d in range(1, Qmax + 1):
        m = int(mu[d])
        prefix[d] = prefix[d - 1] + (m * (L // d) if m else 0)
    moeb = []
    for Q in range(1, Qmax + 1):
        total, d = 0, 1
        while d <= Q:
            k = Q // d
            hi = Q // k
            total += k * (prefix[hi] - prefix[d - 1])
            d = hi + 1
        moeb.append(total)
    return L, direct, moeb


def _six_over_pi_sq(Q: int, dps: int = 60):
    with mpmath.workdps(dps):
        return 6 * mpmath.mpf(Q) / mpmath.pi**2


@dataclass(frozen=True)
class TotientReport:
    Q: int
    sum: Fraction
    asymptote: float
    within_asymptote: bool

    @property
    def verdict(self) -> str:
        return "within" if self.within_asymptote else "exceeds"


def totient_sum_report(Q: int) -> TotientReport:
    """Exact ``sum phi(q)/q`` against ``6Q/pi^2``; the comparison is reported, not asserted."""
    s = totient_sum(Q)
    with mpmath.workdps(80):
        diff = mpmath.mpf(s.numerator) / s.denominator - _six_over_pi_sq(Q, 80)
        holds = bool(diff <= 0)
    return TotientReport(Q, s, float(_six_over_pi_sq(Q)), holds)


@dataclass(frozen=True)
class B1ProbabilityReport:
    Q: int
    kappa: Fraction
    probability: Fraction
    union_bound_value: Fraction
    union_bound_holds: bool
    asymptotic_figure: float
    asymptotic_holds: bool


def b1_probability_report(Q: int, kappa) -> B1ProbabilityReport:
    """Exact probability of B_1(Q, k) beside the union bound and ``1 - 12k/pi^2``."""
    k = _frac(kappa)
    prob = exact_b1_measure(Q, k)
    ub = 1 - union_bound(Q, k)
    with mpmath.workdps(60):
        fig = 1 - 12 * (mpmath.mpf(k.numerator) / k.denominator) / mpmath.pi**2
        holds = bool(mpmath.mpf(prob.numerator) / prob.denominator >= fig)
    return B1ProbabilityReport(Q, k, prob, ub, prob >= ub, float(fig), holds)


# Monte Carlo

@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate with a 4-sigma normal-approximation radius."""

    estimate: float
    successes: int
    samples: int
    radius: float
    seed: int
    unresolved: int = 0
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, successes: int, samples: int, seed: int, unresolved: int = 0, **notes):
        p = successes / samples
        return cls(p, successes, samples, 4.0 * math.sqrt(p * (1 - p) / samples), seed, unresolved, notes)

    def contains(self, value) -> bool:
        return abs(self.estimate - float(value)) <= self.radius


_FLOAT_SLACK = 1e-12


class AlwaysTrue:
    dim = 1
    name = "always"

    def evaluate(self, pts):
        return np.ones(len(pts), dtype=bool), 0


class _FormEvent:
    """Membership ``|q.xi + p| >= threshold(q)`` for every q in a half box."""

    dim: int
    width: int

    def _thresholds(self, qs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _exact(self, point: tuple[Fraction, ...]) -> bool | None:
        return None

    def evaluate(self, pts: np.ndarray):
        qs = np.concatenate(list(half_box_chunks([self.width] * self.dim)))
        thr = self._thresholds(qs)
        margin = np.full(len(pts), np.inf)
        for q, t in zip(qs.astype(np.float64), thr):
            f = pts @ q
            margin = np.minimum(margin, np.abs(f - np.rint(f)) - t)
        member = margin > _FLOAT_SLACK
        unsure = np.abs(margin) <= _FLOAT_SLACK
        unresolved = 0
        for i in np.nonzero(unsure)[0]:
            verdict = self._exact(tuple(Fraction(float(x)) for x in pts[i]))
            if verdict is None:
                unresolved += 1
            else:
                member[i] = verdict
        return member, unresolved


def _exact_form_member(point, qs, thresholds) -> bool:
    for q, t in zip(qs, thresholds):
        s = sum(int(a) * x for a, x in zip(q, point))
        d = min(s - math.floor(s), math.ceil(s) - s)
        if d < t:
            return False
    return True


class BnEvent(_FormEvent):
    """``xi`` in B_n(Q, k): ``|q.xi + p| >= k / Q**n`` for all ``0 < |q| <= Q``."""

    name = "bn"

    def __init__(self, n: int, Q: int, kappa):
        self.dim, self.width, self.Q = n, Q, Q
        self.kappa = _frac(kappa)
        self.threshold = self.kappa / Fraction(Q) ** n

    def _thresholds(self, qs):
        return np.full(len(qs), float(self.threshold))

    def _exact(self, point):
        qs = np.concatenate(list(half_box_chunks([self.width] * self.dim)))
        return _exact_form_member(point, qs, [self.threshold] * len(qs))


class B1Event(BnEvent):
    name = "b1"

    def __init__(self, Q: int, kappa):
        super().__init__(1, Q, kappa)


class BPsiEvent(_FormEvent):
    """``|q.xi + p| >= k * psi(|q|)`` for ``0 < |q| <= T``, with ``psi(q) = q**(-n-eps)``.

    ``tail_bound`` bounds the measure of points violating the inequality only
    for ``|q| > T``, so ``estimate - tail_bound`` is a conservative estimate of
    the untruncated probability.
    """

    name = "bpsi"

    def __init__(self, n: int, kappa, eps: float, truncation: int = 20):
        self.dim, self.width = n, truncation
        self.kappa, self.eps = float(kappa), float(eps)
        s = n + self.eps
        T = truncation
        C = 2.0 ** (n - 1) * (1 + 1 / (2 * T)) ** (n - 1)
        self.tail_bound = 2 * n * self.kappa * C * T ** (n - s) / (s - n)

    def _thresholds(self, qs):
        h = np.abs(qs).max(axis=1).astype(np.float64)
        return self.kappa * h ** (-(self.dim + self.eps))


def make_event(name: str, **params):
    """Event by registry name: ``always``, ``b1``, ``bn`` or ``bpsi``."""
    table = {"always": AlwaysTrue, "b1": B1Event, "bn": BnEvent, "bpsi": BPsiEvent}
    if name not in table:
        raise ValueError(f"unknown event {name!r}; choose from {sorted(table)}")
    return table[name](**params)


def mc_probability(event, N: int, seed: int, chunk: int = 1 << 15) -> MCEstimate:
    """Fraction of ``N`` seeded uniform points satisfying ``event``.

    Point ``i`` depends only on ``(seed, i)``, so any chunking gives the same
    answer.  Points whose float margin is too small are rechecked exactly;
    any that cannot be are counted as non-members and reported as unresolved.
    """
    if N < 1:
        raise ValueError("N must be positive")
    hits = unresolved = 0
    for start in range(0, N, chunk):
        cnt = min(chunk, N - start)
        pts = _rng.uniform_points(seed, start, cnt, event.dim)
        member, unres = event.evaluate(pts)
        hits += int(member.sum())
        unresolved += unres
    notes = {}
    if hasattr(event, "tail_bound"):
        notes["tail_bound"] = event.tail_bound
    return MCEstimate.from_counts(hits, N, seed, unresolved, **notes)
