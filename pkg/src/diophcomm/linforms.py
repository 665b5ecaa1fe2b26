"""Linear forms and systems of linear forms: witnesses, profiles, bounds.

All searches run over the half box ``1 <= |q|_inf <= Q`` with first nonzero
coordinate of ``q`` positive; ``-q`` gives identical values.  Ties resolve to
the lexicographically smallest ``q``, then the smallest ``p``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactnum import ExactReal, as_real
from .exactnum.search import certified_argmin, form_error_bound, nearest_int_distance

__all__ = [
    "LinearFormMatrix",
    "Witness",
    "DivergentSeriesError",
    "one_form_witness",
    "one_form_profile",
    "system_witness",
    "joint_witness",
    "joint_profile",
    "effective_lower_bounds",
    "psi_value",
]


class DivergentSeriesError(ValueError):
    """The requested Khintchine-Groshev series diverges."""


@dataclass(frozen=True)
class LinearFormMatrix:
    """An n-by-m matrix whose columns are the points of the m linear forms."""

    rows: tuple[tuple[ExactReal, ...], ...]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("matrix dimensions must be positive")
        if any(len(r) != len(self.rows[0]) for r in self.rows):
            raise ValueError("ragged matrix")

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "LinearFormMatrix":
        cols = [[as_real(x) for x in c] for c in columns]
        n = len(cols[0])
        if any(len(c) != n for c in cols):
            raise ValueError("columns must have equal length")
        return cls(tuple(tuple(c[i] for c in cols) for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "LinearFormMatrix":
        return cls(tuple(tuple(as_real(x) for x in r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0])

    def column(self, j: int) -> tuple[ExactReal, ...]:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple[ExactReal, ...]]:
        return [self.column(j) for j in range(self.m)]


@dataclass(frozen=True)
class Witness:
    p: tuple[int, ...]
    q: tuple[int, ...]
    value: ExactReal

    def recompute(self, Xi: LinearFormMatrix) -> ExactReal:
        vals = [abs(_dot(self.q, col) + pj) for col, pj in zip(Xi.columns(), self.p)]
        out = vals[0]
        for v in vals[1:]:
            if v > out:
                out = v
        return out


def _dot(q: Sequence[int], xi: Sequence[ExactReal]) -> ExactReal:
    s = ExactReal.from_fraction(0)
    for qi, x in zip(q, xi):
        if qi:
            s = s + x * qi
    return s


def _nearest_p(s: ExactReal) -> tuple[ExactReal, int]:
    """``min_p |s + p|`` and the minimising ``p`` (smallest on ties)."""
    fl = s.floor()
    d_lo = s - fl          # p = -fl
    d_hi = (fl + 1) - s    # p = -fl - 1
    if d_hi <= d_lo:
        return d_hi, -fl - 1
    return d_lo, -fl


def _approx_columns(cols):
    out = []
    for col in cols:
        pairs = [x.approx() for x in col]
        out.append((np.array([f for f, _ in pairs]), [e for _, e in pairs]))
    return out


def _column_search(Xi: LinearFormMatrix, Q: int, combine: str):
    if Q < 1:
        raise ValueError("Q must be positive")
    cols = Xi.columns()
    approx_cols = _approx_columns(cols)
    widths = [Q] * Xi.n
    err = max(form_error_bound(list(f), e, widths) for f, e in approx_cols)
    reduce_ = np.maximum if combine == "max" else np.minimum

    def approx(pts):
        fpts = pts.astype(np.float64)
        acc = None
        for f, _ in approx_cols:
            d = nearest_int_distance(fpts @ f)
            acc = d if acc is None else reduce_(acc, d)
        return acc

    def exact(q):
        ds, ps = [], []
        for col in cols:
            d, p = _nearest_p(_dot(q, col))
            ds.append(d)
            ps.append(p)
        best = ds[0]
        for d in ds[1:]:
            if (d > best) if combine == "max" else (d < best):
                best = d
        return best, tuple(ps)

    q, (value, p) = certified_argmin(widths, approx, err, exact)
    return Witness(p, q, value)


def one_form_witness(xi: Sequence, Q: int) -> Witness:
    """Minimiser of ``|q.xi + p|`` over ``1 <= |q| <= Q``; value is below ``Q**-n``."""
    Xi = LinearFormMatrix.from_columns([xi])
    return _column_search(Xi, Q, "max")


def one_form_profile(xi: Sequence, Q: int) -> ExactReal:
    """``Q**n * min |q.xi + p|``; ``xi`` lies in B_n(Q, k) iff this is >= k."""
    w = one_form_witness(xi, Q)
    return w.value * Q ** len(xi)


def system_witness(Xi: LinearFormMatrix, Q: int) -> Witness:
    """Minimiser of the sup over columns of ``|q.xi_j + p_j|``; value below ``Q**(-n/m)``."""
    return _column_search(Xi, Q, "max")


def joint_witness(Xi: LinearFormMatrix, Q: int) -> Witness:
    """Minimiser of the min over columns of ``|q.xi_j + p_j|``."""
    return _column_search(Xi, Q, "min")


def joint_profile(Xi: LinearFormMatrix, Q: int) -> ExactReal:
    """``Q**n * min_q min_j min_p |q.xi_j + p|``."""
    return joint_witness(Xi, Q).value * Q ** Xi.n


# effective bounds

def psi_value(q: float, n: int, eps: float, family: str = "power") -> float:
    """Approximating function: ``q**(-n-eps)`` or ``q**-n * log(q+1)**(-1-eps)``."""
    if family == "power":
        return q ** (-n - eps)
    if family == "log":
        return q ** (-n) * math.log(q + 1) ** (-1 - eps)
    raise ValueError(f"unknown psi family {family!r}")


def _kg_series(n: int, m: int, eps: float, family: str, truncation: int) -> float:
    """Upper bound for ``sum_{q>=1} (2q+1)**(n-1) * psi(q)**m``."""
    if family == "power":
        s = m * (n + eps)
        if s <= n:
            raise DivergentSeriesError(f"sum of (2q+1)^{n-1} q^-{s} diverges")
    elif family == "log":
        if m == 1 and eps <= 0:
            raise DivergentSeriesError("log family with m = 1 needs eps > 0")
    else:
        raise ValueError(f"unknown psi family {family!r}")
    T = truncation
    q = np.arange(1, T + 1, dtype=np.float64)
    if family == "power":
        terms = (2 * q + 1) ** (n - 1) * q ** (-(n + eps) * m)
    else:
        terms = (2 * q + 1) ** (n - 1) * (q ** (-n) * np.log(q + 1) ** (-1 - eps)) ** m
    head = math.fsum(terms.tolist())
    head *= 1 + (T + 16) * 2.0**-52
    C = 2.0 ** (n - 1) * (1 + 1 / (2 * T)) ** (n - 1)
    if family == "power":
        tail = C * T ** (n - s) / (s - n)
    elif m == 1:
        tail = C * math.log(T) ** (-eps) / eps
    else:
        tail = C * math.log(T + 1) ** (-m * (1 + eps)) * T ** (n - m * n) / (m * n - n)
    return head + tail * (1 + 1e-12)


def effective_lower_bounds(variant: str, *, n: int, kappa, m: int = 1, Q: int | None = None,
                           eps: float | None = None, psi: str = "power", truncation: int = 10**5):
    """Right-hand side of the effective probability lower bounds.

    ``mum2``: ``1 - 2**n k (1+1/(2Q))**(n-1) (1+1/Q)``, exact for rational ``kappa``.
    ``ekg``:  ``1 - 4 n k S``, ``S = sum (2q+1)**(n-1) psi(q)``.
    ``eff``:  ``1 - 2**m n k**m S_m``, ``S_m = sum (2q+1)**(n-1) psi(q)**m``.
    Series bounds are truncated, the tail is bounded by an integral and
    added, and the result is rounded down, so the bound is never overstated.
    """
    if variant == "mum2":
        if Q is None or Q < 1:
            raise ValueError("mum2 needs Q >= 1")
        if isinstance(kappa, ExactReal):
            k = kappa.as_fraction()
        elif isinstance(kappa, float):
            k = Fraction(repr(kappa))
        else:
            k = Fraction(kappa)
        return 1 - 2**n * k * (1 + Fraction(1, 2 * Q)) ** (n - 1) * (1 + Fraction(1, Q))
    if eps is None:
        raise ValueError(f"{variant} needs eps")
    k = float(kappa)
    if variant == "ekg":
        if k == 0:
            return 1.0
        S = _kg_series(n, 1, float(eps), psi, truncation)
        return math.nextafter(1 - 4 * n * k * S, -math.inf)
    if variant == "eff":
        if k == 0:
            return 1.0
        S = _kg_series(n, m, float(eps), psi, truncation)
        return math.nextafter(1 - 2**m * n * k**m * S, -math.inf)
    raise ValueError(f"unknown variant {variant!r}")
