"""The :class:`ExactReal` number type and its textual grammar.

Values are rational functions of seeded draws with coefficients in a
multiquadratic field.  Rationals, decimals and quadratic surds carry no
draws and are decided exactly.  Seeded draws are treated as algebraically
independent, so an expression is zero exactly when its numerator polynomial
vanishes identically; any other sign is certified by interval refinement up
to the precision cap.
"""

from __future__ import annotations

import contextlib
import contextvars
import re
from decimal import Decimal
from fractions import Fraction
from math import floor, gcd

from .draws import leading_bits
from .field import Quad, squarefree_split
from .intervals import Interval

__all__ = [
    "ExactReal",
    "PrecisionCapError",
    "GrammarError",
    "parse_real",
    "precision_cap",
    "get_precision_cap",
    "DEFAULT_PRECISION_CAP",
    "as_real",
]

DEFAULT_PRECISION_CAP = 4096
_START_PREC = 64

_cap_var: contextvars.ContextVar[int] = contextvars.ContextVar("precision_cap", default=DEFAULT_PRECISION_CAP)


class PrecisionCapError(ArithmeticError):
    """A sign or floor could not be certified below the precision cap."""


class GrammarError(ValueError):
    """Text does not match the number grammar."""


def get_precision_cap() -> int:
    return _cap_var.get()


@contextlib.contextmanager
def precision_cap(bits: int):
    """Temporarily set the maximum working precision in bits."""
    if bits < _START_PREC:
        raise ValueError(f"precision cap must be at least {_START_PREC} bits")
    token = _cap_var.set(bits)
    try:
        yield
    finally:
        _cap_var.reset(token)


def _precisions():
    p, cap = _START_PREC, _cap_var.get()
    while p < cap:
        yield p
        p *= 2
    yield cap


# Polynomials in seeded draws: {monomial: Quad}, monomial = ((atom, exp), ...)
Atom = tuple[str, int]
Mono = tuple[tuple[Atom, int], ...]
Poly = dict[Mono, Quad]

_ONE: Mono = ()


def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for atom, e in b:
        d[atom] = d.get(atom, 0) + e
    return tuple(sorted(d.items()))


def _padd(a: Poly, b: Poly, sub: bool = False) -> Poly:
    out = dict(a)
    for m, c in b.items():
        c = -c if sub else c
        v = out[m] + c if m in out else c
        if v.is_zero():
            out.pop(m, None)
        else:
            out[m] = v
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(m1, m2)
            v = out[m] + c1 * c2 if m in out else c1 * c2
            if v.is_zero():
                out.pop(m, None)
            else:
                out[m] = v
    return out


def _pscale(a: Poly, q: Quad) -> Poly:
    return {m: c * q for m, c in a.items()}


def _atom_interval(atom: Atom, prec: int) -> Interval:
    m = leading_bits(atom[0], atom[1], prec)
    return Interval(m, m + 1, prec)


def _pinterval(p: Poly, prec: int) -> Interval:
    acc = Interval.exact(0, prec)
    for mono, c in p.items():
        term = c.interval(prec)
        for atom, e in mono:
            term = term * _atom_interval(atom, prec).pow(e)
        acc = acc + term
    return acc


def _psign(p: Poly) -> int:
    if not p:
        return 0
    if len(p) == 1 and _ONE in p:
        return p[_ONE].sign()
    for prec in _precisions():
        iv = _pinterval(p, prec)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
    raise PrecisionCapError(f"sign not certified at {_cap_var.get()} bits")


def _coerce(x) -> "ExactReal":
    if isinstance(x, ExactReal):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactReal.from_fraction(x)
    if isinstance(x, float):
        return ExactReal.from_fraction(Fraction(x))
    if isinstance(x, str):
        return parse_real(x)
    return NotImplemented


as_real = _coerce


class ExactReal:
    """An exact or adaptively refined real number.

    Construct with :meth:`from_fraction`, :meth:`surd`, :meth:`seeded` or
    :func:`parse_real`.  Arithmetic with ints and Fractions is supported and
    stays exact; comparisons return certified answers or raise
    :class:`PrecisionCapError` (never for values without seeded draws).
    """

    __slots__ = ("_q", "_num", "_den", "_kind", "_text", "_ivcache")

    def __init__(self, *, quad: Quad | None = None, num: Poly | None = None, den: Poly | None = None,
                 kind: str | None = None, text: str | None = None):
        if quad is None:
            assert num is not None
            den = den if den is not None else {_ONE: Quad.rational(1)}
            if not num:
                quad = Quad()
            elif len(den) == 1 and _ONE in den:
                inv = den[_ONE].inverse()
                num = _pscale(num, inv)
                den = None
                if len(num) == 1 and _ONE in num:
                    quad = num[_ONE]
        self._q = quad
        self._num = None if quad is not None else num
        self._den = None if quad is not None else (den or {_ONE: Quad.rational(1)})
        self._kind = kind
        self._text = text
        self._ivcache: dict[int, Interval] = {}

    # constructors
    @classmethod
    def from_fraction(cls, q) -> "ExactReal":
        return cls(quad=Quad.rational(Fraction(q)), kind="rational")

    @classmethod
    def surd(cls, a: int, b: int, d: int, c: int = 1) -> "ExactReal":
        """The number ``(a + b*sqrt(d)) / c``."""
        if c == 0:
            raise ZeroDivisionError("surd denominator is zero")
        if d < 0:
            raise GrammarError("negative radicand")
        if d == 0:
            b = 0
            d = 1
        k, r = squarefree_split(d)
        q = Quad({1: Fraction(a, c)}) + Quad({r: Fraction(b * k, c)})
        return cls(quad=q)

    @classmethod
    def from_decimal(cls, literal: str) -> "ExactReal":
        try:
            v = Fraction(Decimal(literal))
        except Exception as exc:
            raise GrammarError(f"bad decimal literal {literal!r}") from exc
        return cls(quad=Quad.rational(v), kind="decimal", text=f"dec:{literal}")

    @classmethod
    def seeded(cls, stream: str, index: int) -> "ExactReal":
        """Uniform draw in (0, 1) identified by ``(stream, index)``."""
        if not re.fullmatch(r"[A-Za-z0-9_.\-]+", str(stream)) or index < 0:
            raise GrammarError(f"bad seeded draw id {stream!r}:{index}")
        atom = (str(stream), int(index))
        return cls(num={((atom, 1),): Quad.rational(1)}, kind="seeded", text=f"rand:{stream}:{index}")

    # structure
    @property
    def is_exact(self) -> bool:
        """True when no seeded draw is involved."""
        return self._q is not None

    @property
    def kind(self) -> str:
        if self._kind is not None:
            return self._kind
        if self._q is None:
            return "expression"
        if self._q.is_rational():
            return "rational"
        if len([r for r in self._q.terms if r != 1]) == 1:
            return "surd"
        return "algebraic"

    def is_rational(self) -> bool:
        return self._q is not None and self._q.is_rational()

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is not rational")
        return self._q.rational_value()

    def as_quad(self) -> Quad:
        if self._q is None:
            raise ValueError("value involves seeded draws")
        return self._q

    def _parts(self) -> tuple[Poly, Poly]:
        if self._q is not None:
            return ({_ONE: self._q} if not self._q.is_zero() else {}), {_ONE: Quad.rational(1)}
        return self._num, self._den

    # arithmetic
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self._q is not None and o._q is not None:
            return ExactReal(quad=self._q + o._q)
        n1, d1 = self._parts()
        n2, d2 = o._parts()
        if d1 == d2:
            return ExactReal(num=_padd(n1, n2), den=d1)
        return ExactReal(num=_padd(_pmul(n1, d2), _pmul(n2, d1)), den=_pmul(d1, d2))

    __radd__ = __add__

    def __neg__(self):
        if self._q is not None:
            return ExactReal(quad=-self._q)
        return ExactReal(num={m: -c for m, c in self._num.items()}, den=self._den)

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self._q is not None and o._q is not None:
            return ExactReal(quad=self._q * o._q)
        n1, d1 = self._parts()
        n2, d2 = o._parts()
        return ExactReal(num=_pmul(n1, n2), den=_pmul(d1, d2))

    __rmul__ = __mul__

    def reciprocal(self) -> "ExactReal":
        if self._q is not None:
            return ExactReal(quad=self._q.inverse())
        if not self._num:
            raise ZeroDivisionError("division by zero")
        return ExactReal(num=self._den, den=self._num)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o * self.reciprocal()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.reciprocal()
        out = ExactReal.from_fraction(1)
        for _ in range(abs(e)):
            out = out * base
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __pos__(self):
        return self

    # certified queries
    def is_zero(self) -> bool:
        return self._q.is_zero() if self._q is not None else not self._num

    def sign(self) -> int:
        """Certified sign in {-1, 0, 1}."""
        if self._q is not None:
            return self._q.sign()
        if not self._num:
            return 0
        return _psign(self._num) * _psign(self._den)

    def interval(self, prec: int) -> Interval:
        """Rigorous enclosure at ``prec`` bits (refining internally if needed)."""
        iv = self._ivcache.get(prec)
        if iv is not None:
            return iv
        if self._q is not None:
            iv = self._q.interval(prec)
        else:
            work = prec
            while True:
                d = _pinterval(self._den, work)
                if not d.contains_zero():
                    n = _pinterval(self._num, work)
                    iv = n / d
                    break
                if work >= _cap_var.get():
                    raise PrecisionCapError("denominator not separated from zero")
                work *= 2
            if work != prec:
                iv = Interval(iv.lo >> (work - prec), -((-iv.hi) >> (work - prec)), prec)
        self._ivcache[prec] = iv
        return iv

    def approx(self) -> tuple[float, float]:
        """Return ``(f, e)`` with ``|self - f| <= e``."""
        iv = self.interval(96)
        mid = iv.midpoint()
        f = float(mid)
        err = abs(Fraction(f) - mid) + iv.radius()
        e = float(err)
        if Fraction(e) < err:
            e = float(err * 2)
        return f, e

    def __float__(self) -> float:
        return self.approx()[0]

    def floor(self) -> int:
        for prec in _precisions():
            iv = self.interval(prec)
            lo = iv.lo >> prec
            if iv.hi < ((lo + 1) << prec):
                return lo
            if self._q is not None:
                break
        n = floor(float(self))
        # exact fallback; sign() never raises for exact values
        while (self - n).sign() < 0:
            n -= 1
        while (self - (n + 1)).sign() >= 0:
            n += 1
        return n

    def ceil(self) -> int:
        return -(-self).floor()

    def _cmp(self, other) -> int:
        o = _coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare ExactReal with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        o = _coerce(other) if not isinstance(other, ExactReal) else other
        if o is NotImplemented:
            return NotImplemented
        return (self - o).is_zero()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None  # value equality is not cheaply hashable

    # text
    def to_text(self) -> str:
        """Grammar form; raises ValueError for values with no grammar form."""
        if self._text is not None and self._kind in ("decimal", "seeded"):
            return self._text
        if self._q is None:
            raise ValueError("expression has no grammar form")
        q = self._q
        if q.is_rational():
            v = q.rational_value()
            return f"rat:{v.numerator}/{v.denominator}"
        rads = [r for r in q.terms if r != 1]
        if len(rads) != 1:
            raise ValueError("multi-radical value has no grammar form")
        d = rads[0]
        A, B = q.terms.get(1, Fraction(0)), q.terms[d]
        c = A.denominator * B.denominator // gcd(A.denominator, B.denominator)
        a, b = int(A * c), int(B * c)
        return f"surd:({a}+{b}*sqrt{d})/{c}"

    def __str__(self) -> str:
        try:
            return self.to_text()
        except ValueError:
            return repr(float(self))

    def __repr__(self) -> str:
        return f"ExactReal({self})"


_RAT = re.compile(r"rat:([+-]?\d+)(?:/([+-]?\d+))?")
_SURD = re.compile(r"surd:\(([+-]?\d+)\+([+-]?\d+)\*sqrt(\d+)\)/([+-]?\d+)")
_DEC = re.compile(r"dec:([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)")
_RAND = re.compile(r"rand:([A-Za-z0-9_.\-]+):(\d+)")
_BARE = re.compile(r"([+-]?\d+)(?:/([+-]?\d+))?")
_BARE_DEC = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


def parse_real(text: str) -> ExactReal:
    """Parse ``rat:``, ``surd:``, ``dec:`` or ``rand:`` forms.

    Bare integers, ``a/b`` and decimal literals are accepted as shorthand for
    ``rat:`` and ``dec:`` respectively.
    """
    s = text.strip()
    if m := _RAT.fullmatch(s):
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise GrammarError(f"zero denominator in {text!r}")
        return ExactReal.from_fraction(Fraction(int(m.group(1)), den))
    if m := _SURD.fullmatch(s):
        a, b, d, c = (int(g) for g in m.groups())
        if c == 0:
            raise GrammarError(f"zero denominator in {text!r}")
        return ExactReal.surd(a, b, d, c)
    if m := _DEC.fullmatch(s):
        return ExactReal.from_decimal(m.group(1))
    if m := _RAND.fullmatch(s):
        return ExactReal.seeded(m.group(1), int(m.group(2)))
    if m := _BARE.fullmatch(s):
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise GrammarError(f"zero denominator in {text!r}")
        return ExactReal.from_fraction(Fraction(int(m.group(1)), den))
    if _BARE_DEC.fullmatch(s):
        return ExactReal.from_decimal(s)
    raise GrammarError(f"cannot parse number {text!r}")
