import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diophcomm.exactnum import GOLDEN, SQRT2, ExactReal, WorkLimitError, work_limit
from diophcomm.linforms import (
    DivergentSeriesError,
    LinearFormMatrix,
    effective_lower_bounds,
    joint_profile,
    joint_witness,
    one_form_profile,
    one_form_witness,
    psi_value,
    system_witness,
)

SQRT3 = ExactReal.surd(0, 1, 3)
SQRT5 = ExactReal.surd(0, 1, 5)


def mp(x: ExactReal):
    mid = x.interval(240).midpoint()
    return mpmath.mpf(mid.numerator) / mid.denominator


def brute_system(columns, Q, combine=max):
    """Nested-loop oracle over the whole box; returns (value, canonical q)."""
    with mpmath.workdps(60):
        cols = [[mp(ExactReal.from_fraction(x) if not isinstance(x, ExactReal) else x) for x in c]
                for c in columns]
        n = len(cols[0])
        best = None
        for q in itertools.product(range(-Q, Q + 1), repeat=n):
            if not any(q):
                continue
            first = next(v for v in q if v)
            if first < 0:
                continue
            dists = []
            for c in cols:
                s = sum(a * x for a, x in zip(q, c))
                dists.append(abs(s - mpmath.nint(s)))
            key = (combine(dists), q)
            if best is None or key < best:
                best = key
        return best


def seeded_columns(tag, index, n, m):
    return [[ExactReal.seeded(tag, index * 16 + j * n + i) for i in range(n)] for j in range(m)]


# one linear form

def test_integer_point_witness():
    w = one_form_witness([0, 0], 3)
    assert w.value.is_zero() and w.p == (0,)
    # lexicographically smallest half-box q with first nonzero entry positive
    assert w.q == (0, 1)


def test_golden_sqrt2_witness_beats_dirichlet_bound():
    w = one_form_witness([GOLDEN, SQRT2], 4)
    assert w.value < Fraction(1, 16)
    value, q = brute_system([[GOLDEN, SQRT2]], 4)
    assert w.q == q
    assert abs(float(w.value) - float(value)) < 1e-14
    assert w.q == (2, -3) and w.p == (1,)


def test_perron_point_stays_away_from_zero():
    with mpmath.workdps(40):
        c2, c4 = mpmath.cbrt(2), mpmath.cbrt(4)
        xi = [ExactReal.from_decimal(mpmath.nstr(v, 35)) for v in (c2, c4)]
    w = one_form_witness(xi, 10)
    value, q = brute_system([xi], 10)
    assert w.q == q
    # oracle value 0.001186334780038378...; frozen lower constant c = 0.1 at scale 10^-2
    assert abs(float(w.value) - 0.0011863347800383781) < 1e-15
    assert w.value >= Fraction(1, 10) * Fraction(1, 100)


def test_rational_point_profile_zero():
    assert one_form_profile([Fraction(1, 2), Fraction(1, 3)], 6).is_zero()


def test_equal_coordinates_give_zero_at_one_minus_one():
    xi = [GOLDEN, 1 + GOLDEN.reciprocal()]
    w = one_form_witness(xi, 5)
    assert w.value.is_zero()
    assert w.q == (1, -1) and w.p == (0,)


def test_golden_sqrt2_profile_in_unit_interval():
    v = one_form_profile([GOLDEN, SQRT2], 4)
    assert 0 < v < 1


def test_witness_value_recomputes():
    xi = [GOLDEN, SQRT2, SQRT3]
    w = one_form_witness(xi, 3)
    assert w.recompute(LinearFormMatrix.from_columns([xi])) == w.value


def test_work_limit_is_an_error_not_truncation():
    with work_limit(100), pytest.raises(WorkLimitError):
        one_form_witness([GOLDEN, SQRT2, SQRT3], 10)


@given(st.integers(0, 10**5), st.integers(1, 3), st.integers(1, 12))
def test_one_form_strictness(index, n, Q):
    xi = seeded_columns("strict", index, n, 1)[0]
    w = one_form_witness(xi, Q)
    assert 1 <= max(abs(v) for v in w.q) <= Q
    assert w.value * Q**n < 1
    assert one_form_profile(xi, Q) < 1


@settings(max_examples=100)
@given(st.integers(0, 10**5), st.integers(1, 3), st.integers(1, 2), st.integers(1, 20))
def test_system_oracle_equivalence(index, n, m, Q):
    if (2 * Q + 1) ** n > 3000:
        Q = int(((3000 ** (1 / n)) - 1) // 2)
    cols = seeded_columns("oracle", index, n, m)
    Xi = LinearFormMatrix.from_columns(cols)
    w = system_witness(Xi, Q)
    value, q = brute_system(cols, Q, max)
    assert w.q == q
    assert abs(float(w.value) - float(value)) < 1e-13
    jw = joint_witness(Xi, Q)
    jvalue, jq = brute_system(cols, Q, min)
    assert jw.q == jq
    assert abs(float(jw.value) - float(jvalue)) < 1e-13


# systems of forms

def test_zero_system():
    w = system_witness(LinearFormMatrix.from_rows([[0, 0], [0, 0]]), 2)
    assert w.value.is_zero() and w.p == (0, 0) and w.q == (0, 1)


def test_two_by_two_system_witness():
    Xi = LinearFormMatrix.from_columns([[GOLDEN, SQRT2], [SQRT3, SQRT5]])
    w = system_witness(Xi, 6)
    assert w.value < Fraction(1, 6)
    assert w.q == (1, 1) and w.p == (-3, -4)


def test_one_by_two_system_witness():
    Xi = LinearFormMatrix.from_rows([[GOLDEN, GOLDEN]])
    w = system_witness(Xi, 10)
    assert w.value * w.value < Fraction(1, 10)
    assert w.q == (8,) and w.value == ExactReal.surd(9, -4, 5)


@given(st.integers(0, 10**5), st.integers(1, 2), st.integers(1, 2), st.integers(1, 10))
def test_system_strictness(index, n, m, Q):
    Xi = LinearFormMatrix.from_columns(seeded_columns("sys", index, n, m))
    w = system_witness(Xi, Q)
    # |value| < Q^(-n/m)  <=>  value^m Q^n < 1
    assert w.value**m * Q**n < 1


# joint profiles

def test_joint_profile_pinned():
    Xi = LinearFormMatrix.from_columns([[GOLDEN, SQRT2], [SQRT3, SQRT5]])
    v = joint_profile(Xi, 8)
    value, _ = brute_system([[GOLDEN, SQRT2], [SQRT3, SQRT5]], 8, min)
    assert abs(float(v) - 64 * float(value)) < 1e-12
    assert abs(float(v) - 0.4206534156477088) < 1e-12


def test_joint_profile_with_rational_column_vanishes():
    Xi = LinearFormMatrix.from_columns([[GOLDEN, SQRT2], [Fraction(1, 2), Fraction(2, 3)]])
    assert joint_profile(Xi, 6).is_zero()


@given(st.integers(0, 10**5), st.integers(1, 3), st.integers(1, 6))
def test_joint_profile_with_one_column_is_one_form_profile(index, n, Q):
    xi = seeded_columns("m1", index, n, 1)[0]
    assert joint_profile(LinearFormMatrix.from_columns([xi]), Q) == one_form_profile(xi, Q)


@given(st.integers(0, 10**5), st.integers(1, 2), st.integers(1, 8))
def test_joint_profile_below_each_column(index, n, Q):
    cols = seeded_columns("joint", index, n, 2)
    jp = joint_profile(LinearFormMatrix.from_columns(cols), Q)
    singles = [one_form_profile(c, Q) for c in cols]
    assert all(jp <= s for s in singles)
    assert any(jp == s for s in singles)


@settings(max_examples=500)
@given(st.integers(0, 10**5), st.fractions(Fraction(1, 100), Fraction(99, 100)), st.integers(1, 6))
def test_bn_membership_matches_profile(index, kappa, Q):
    xi = seeded_columns("bn", index, 2, 1)[0]
    inside = all(
        abs(sum(a * x for a, x in zip(q, xi)) - round(float(sum(a * x for a, x in zip(q, xi)))))
        * Q**2 >= kappa
        for q in itertools.product(range(-Q, Q + 1), repeat=2) if any(q)
    )
    assert inside == (one_form_profile(xi, Q) >= kappa)


# effective bounds

def test_mum2_example():
    assert effective_lower_bounds("mum2", n=2, Q=10, kappa=Fraction(1, 20)) == Fraction(769, 1000)


def test_ekg_zero_kappa_is_one():
    assert effective_lower_bounds("ekg", n=2, kappa=0, eps=0.5) == 1.0


def test_eff_at_m1_against_ekg_constants():
    # same series; the two constants are 4n (ekg) and 2n (eff at m = 1)
    ekg = effective_lower_bounds("ekg", n=2, kappa=0.01, eps=0.5)
    eff = effective_lower_bounds("eff", n=2, m=1, kappa=0.01, eps=0.5)
    assert abs((1 - ekg) - 2 * (1 - eff)) < 1e-12


def test_series_bound_is_conservative():
    # closed form: sum (2q+1) q^-2.5 = 2 zeta(1.5) + zeta(2.5)
    with mpmath.workdps(30):
        S = 2 * mpmath.zeta(1.5) + mpmath.zeta(2.5)
    exact = 1 - 8 * 0.01 * float(S)
    got = effective_lower_bounds("ekg", n=2, kappa=0.01, eps=0.5, truncation=1000)
    assert got <= exact
    assert exact - got < 1e-4


def test_log_family_is_conservative():
    with mpmath.workdps(30):
        S = mpmath.nsum(lambda q: q ** -1 * mpmath.log(q + 1) ** -1.5, [1, mpmath.inf])
    exact = 1 - 4 * 0.001 * float(S)
    got = effective_lower_bounds("ekg", n=1, kappa=0.001, eps=0.5, psi="log")
    assert got <= exact


def test_divergent_series_raises():
    with pytest.raises(DivergentSeriesError):
        effective_lower_bounds("ekg", n=2, kappa=0.01, eps=0.0)
    with pytest.raises(DivergentSeriesError):
        effective_lower_bounds("ekg", n=1, kappa=0.01, eps=0.0, psi="log")


def test_psi_families():
    assert psi_value(2, 1, 1.0) == 0.25
    assert psi_value(2, 1, 0.0, "log") == pytest.approx(0.5 / math.log(3))


@given(st.integers(1, 3), st.integers(1, 50), st.fractions(Fraction(1, 1000), Fraction(1, 10)))
def test_mum2_monotone_in_kappa(n, Q, kappa):
    a = effective_lower_bounds("mum2", n=n, Q=Q, kappa=kappa)
    b = effective_lower_bounds("mum2", n=n, Q=Q, kappa=kappa * 2)
    assert b < a
