import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diophcomm.exactnum import (
    GOLDEN,
    SQRT2,
    ExactReal,
    GrammarError,
    PrecisionCapError,
    bad_constant_lower,
    cf_expand,
    convergents,
    dirichlet_approx,
    dirichlet_profile,
    parse_real,
    precision_cap,
)

FIB20 = 6765


def high_precision(x: ExactReal, dps: int = 60):
    iv = x.interval(dps * 4)
    with mpmath.workdps(dps):
        return mpmath.mpf(iv.midpoint().numerator) / iv.midpoint().denominator


def brute_dirichlet(x: ExactReal, Q: int):
    """Nested-loop oracle: minimise |q x - p| with ties to smaller q then p."""
    with mpmath.workdps(60):
        xv = high_precision(x)
        best = None
        for q in range(1, Q + 1):
            base = int(mpmath.floor(q * xv))
            for p in (base - 1, base, base + 1, base + 2):
                key = (abs(q * xv - p), q, p)
                if best is None or key < best:
                    best = key
        return best


# construction and grammar

def test_rational_is_reduced():
    x = ExactReal.from_fraction(Fraction(6, -4))
    assert x.as_fraction() == Fraction(-3, 2)
    assert x.to_text() == "rat:-3/2"


def test_surd_with_zero_radical_part_is_rational():
    assert ExactReal.surd(3, 0, 5, 2).is_rational()
    assert ExactReal.surd(3, 0, 5, 2).kind == "rational"


def test_surd_radicand_is_made_squarefree():
    assert ExactReal.surd(0, 1, 8) == ExactReal.surd(0, 2, 2)


@pytest.mark.parametrize("text", ["rat:3/7", "rat:-5/1", "surd:(1+1*sqrt5)/2", "surd:(3+-2*sqrt7)/5"])
def test_grammar_round_trip(text):
    assert parse_real(text).to_text() == text


def test_decimal_and_seeded_keep_their_text():
    assert parse_real("dec:0.125").to_text() == "dec:0.125"
    assert parse_real("dec:0.125") == Fraction(1, 8)
    assert parse_real("rand:s:3").to_text() == "rand:s:3"


@pytest.mark.parametrize("bad", ["rat:1/0", "surd:(1+1*sqrt5)/0", "xyz", "rand:s:-1", ""])
def test_grammar_rejects_malformed(bad):
    with pytest.raises((GrammarError, ZeroDivisionError)):
        parse_real(bad)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_rational_round_trip_property(num, den):
    x = ExactReal.from_fraction(Fraction(num, den))
    assert parse_real(x.to_text()).as_fraction() == Fraction(num, den)


@given(st.integers(-50, 50), st.integers(-50, 50).filter(bool), st.integers(2, 60), st.integers(1, 40))
def test_surd_round_trip_property(a, b, d, c):
    x = ExactReal.surd(a, b, d, c)
    assert parse_real(x.to_text()) == x


def test_seeded_draws_are_reproducible_and_in_unit_interval():
    a, b = ExactReal.seeded("s", 3), ExactReal.seeded("s", 3)
    assert a == b
    assert 0 < float(a) < 1
    assert ExactReal.seeded("s", 3) != ExactReal.seeded("s", 4)


# certified comparison

def test_exact_comparisons_never_raise_even_with_tiny_cap():
    with precision_cap(64):
        assert GOLDEN * GOLDEN == GOLDEN + 1
        assert SQRT2 * SQRT2 - 2 == 0
        assert ExactReal.surd(0, 1, 3) > ExactReal.surd(0, 1, 2)


def test_near_tie_with_seeded_draw_hits_precision_cap():
    x = ExactReal.seeded("cap", 0)
    near = x - x.interval(400).midpoint()
    with precision_cap(128), pytest.raises(PrecisionCapError):
        near.sign()


@given(st.integers(0, 10**6), st.fractions(0, 1))
def test_seeded_sign_is_certified(index, q):
    x = ExactReal.seeded("sign", index)
    assert (x - q).sign() == (1 if high_precision(x) > mpmath.mpf(q.numerator) / q.denominator else -1)


# continued fractions

def test_golden_ratio_expansion_is_all_ones():
    cf = cf_expand(GOLDEN, 6)
    assert list(cf) == [1] * 7
    assert not cf.terminated


def test_three_sevenths_terminates():
    cf = cf_expand(Fraction(3, 7), 10)
    assert list(cf) == [0, 2, 3]
    assert cf.terminated


def test_zero_expansion():
    cf = cf_expand(0, 4)
    assert list(cf) == [0]
    assert cf.terminated


def test_cf_rejects_zero_depth():
    with pytest.raises(ValueError):
        cf_expand(GOLDEN, 0)


@given(st.fractions(-20, 20), st.integers(1, 30))
def test_cf_of_rational_reconstructs_value(q, depth):
    cf = cf_expand(q, depth)
    if cf.terminated:
        assert cf.convergents()[-1].value() == q


@given(st.one_of(st.fractions(0, 10), st.integers(0, 500).map(lambda i: ExactReal.seeded("cf", i))),
       st.integers(1, 25))
def test_determinant_identity(x, depth):
    cs = cf_expand(x, depth).convergents()
    for prev, cur in zip(cs, cs[1:]):
        assert cur.p * prev.q - prev.p * cur.q == (-1) ** (cur.index - 1)
    qs = [c.q for c in cs[1:]]
    assert all(b > a for a, b in zip(qs, qs[1:]))


def test_convergents_of_sqrt2():
    assert [(c.p, c.q) for c in convergents([1, 2, 2, 2])] == [(1, 1), (3, 2), (7, 5), (17, 12)]


# Dirichlet approximation

def test_dirichlet_golden_q8():
    assert dirichlet_approx(GOLDEN, 8) == (13, 8)


def test_dirichlet_exact_hits():
    assert dirichlet_approx(Fraction(1, 2), 5) == (1, 2)
    assert dirichlet_approx(Fraction(3, 7), 100) == (3, 7)


def test_profile_golden_q8():
    theta = dirichlet_profile(GOLDEN, 8)
    # 8 * |8 gamma - 13| = 8 * (13 - 4 - 4 sqrt5) = 72 - 32 sqrt5
    assert theta == ExactReal.surd(72, -32, 5)
    assert abs(float(theta) - 0.4458) < 1e-4


def test_profile_golden_q1_is_distance_to_two():
    # |gamma - 2| = (3 - sqrt5)/2 = 0.381966...
    theta = dirichlet_profile(GOLDEN, 1)
    assert theta == ExactReal.surd(3, -1, 5, 2)
    assert abs(float(theta) - 0.381966) < 1e-6


@given(st.integers(1, 60), st.integers(2, 60), st.integers(0, 50))
def test_profile_of_rationals(a, b, extra):
    q = Fraction(a, b)
    assert dirichlet_profile(q, q.denominator + extra).is_zero()
    if q.denominator > 1:
        assert dirichlet_profile(q, q.denominator - 1) > 0


@given(st.integers(0, 10**5), st.integers(1, 10**4))
def test_dirichlet_strict_inequality(index, Q):
    x = ExactReal.seeded("dir", index)
    p, q = dirichlet_approx(x, Q)
    assert 1 <= q <= Q
    assert abs(x * q - p) * Q < 1
    assert dirichlet_profile(x, Q) < 1


@given(st.integers(0, 10**5), st.integers(1, 500))
def test_dirichlet_matches_brute_force(index, Q):
    x = ExactReal.seeded("oracle", index)
    _, q, p = brute_dirichlet(x, Q)
    assert dirichlet_approx(x, Q) == (p, q)


def test_dirichlet_tie_break_on_half():
    # 1/2 ties: q=1 gives 1/2 from p=0 and p=1; q=2 is exact
    assert dirichlet_approx(Fraction(1, 2), 1) == (0, 1)


# badly approximable estimate

def test_golden_badness_in_hurwitz_window():
    v = bad_constant_lower(GOLDEN, FIB20)
    assert v >= ExactReal.surd(0, 1, 5, 6)
    assert v <= ExactReal.surd(0, 1, 5, 5)


@pytest.mark.parametrize("Q", [2, 3, 5, 8, 13, 100, 1000, FIB20])
def test_golden_badness_window_across_depths(Q):
    v = bad_constant_lower(GOLDEN, Q)
    assert ExactReal.surd(0, 1, 5, 6) <= v <= ExactReal.surd(0, 1, 5, 5)


def test_rational_badness_is_zero():
    assert bad_constant_lower(Fraction(3, 7), 7).is_zero()


def test_sqrt2_badness():
    with mpmath.workdps(50):
        r2 = mpmath.sqrt(2)
        oracle = min(q * abs(q * r2 - mpmath.nint(q * r2)) for q in range(1, 101))
    v = bad_constant_lower(SQRT2, 100)
    assert abs(float(v) - float(oracle)) < 1e-12
    assert float(v) >= 0.285


def test_badness_of_seeded_value_matches_brute_force():
    x = ExactReal.seeded("bad", 7)
    with mpmath.workdps(60):
        xv = high_precision(x)
        oracle = min(q * abs(q * xv - mpmath.nint(q * xv)) for q in range(1, 301))
    assert abs(float(bad_constant_lower(x, 300)) - float(oracle)) < 1e-12


def test_floor_of_large_surd():
    assert (GOLDEN * 10**6).floor() == math.floor((1 + math.sqrt(5)) / 2 * 10**6)
