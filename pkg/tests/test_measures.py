import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from diophcomm import _rng
from diophcomm.exactnum import WorkLimitError
from diophcomm.linforms import effective_lower_bounds
from diophcomm.measures import (
    AlwaysTrue,
    B1Event,
    BnEvent,
    BPsiEvent,
    IntervalUnion,
    b1_excluded_set,
    exact_b1_measure,
    b1_probability_report,
    make_event,
    mc_probability,
    mobius,
    totient_sum,
    totient_sum_mobius,
    totient_sum_report,
    totients,
    union_bound,
)

KAPPAS = [Fraction(i, 10) for i in range(1, 10)]


def sampled_b1_oracle(Q, kappa, grid=20000):
    """Midpoint-grid estimate of the excluded measure, independent of interval merging."""
    xs = (np.arange(grid) + 0.5) / grid
    hit = np.zeros(grid, dtype=bool)
    for q in range(1, Q + 1):
        d = np.abs(xs * q - np.rint(xs * q))
        hit |= d < float(kappa) / Q
    return hit.mean()


# interval unions

def test_merge_sorts_and_joins_overlaps():
    u = IntervalUnion.merge([(Fraction(1, 2), Fraction(3, 4)), (Fraction(0), Fraction(1, 4)),
                             (Fraction(5, 8), Fraction(7, 8))])
    assert u.intervals == ((0, Fraction(1, 4)), (Fraction(1, 2), Fraction(7, 8)))
    assert u.measure == Fraction(5, 8)


def test_merge_clips_to_unit_interval():
    u = IntervalUnion.merge([(Fraction(-1, 3), Fraction(1, 3)), (Fraction(2, 3), Fraction(4, 3))])
    assert u.intervals == ((0, Fraction(1, 3)), (Fraction(2, 3), 1))


@given(st.lists(st.tuples(st.fractions(-1, 2), st.fractions(-1, 2)), max_size=12))
def test_merged_union_invariants(raw):
    u = IntervalUnion.merge(raw)
    for (a, b), (c, d) in zip(u.intervals, u.intervals[1:]):
        assert b <= c
    assert all(0 <= a < b <= 1 for a, b in u.intervals)
    assert u.measure == sum((b - a for a, b in u.intervals), Fraction(0))


# exact B_1 measure

def test_b1_golden_example():
    assert exact_b1_measure(2, Fraction(3, 10)) == Fraction(11, 20)
    E = b1_excluded_set(2, Fraction(3, 10))
    assert E.intervals == ((0, Fraction(3, 20)), (Fraction(17, 40), Fraction(23, 40)), (Fraction(17, 20), 1))


def test_b1_full_cover():
    assert exact_b1_measure(1, Fraction(1, 2)) == 0


def test_b1_tiny_kappa():
    k = Fraction(1, 10**6)
    prob = exact_b1_measure(3, k)
    assert 1 - prob <= 2 * k * totient_sum(3)
    assert prob >= 1 - Fraction(1, 10**5)


def test_b1_guard():
    with pytest.raises(WorkLimitError):
        exact_b1_measure(10**4 + 1, Fraction(1, 2))
    with pytest.raises(ValueError):
        exact_b1_measure(3, Fraction(3, 2))


@pytest.mark.parametrize("Q", [1, 2, 3, 5, 8, 13])
@pytest.mark.parametrize("kappa", [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)])
def test_b1_against_grid_oracle(Q, kappa):
    excluded = 1 - exact_b1_measure(Q, kappa)
    assert abs(float(excluded) - sampled_b1_oracle(Q, kappa)) < 2 * (Q + 1) ** 2 / 20000


def test_union_bound_and_monotonicity_for_all_small_Q():
    for Q in range(1, 101):
        prev = None
        ts = totient_sum(Q)
        for kappa in KAPPAS:
            prob = exact_b1_measure(Q, kappa)
            assert 1 - prob <= 2 * kappa / Q * ts
            if prev is not None:
                assert prob <= prev
            prev = prob


@given(st.integers(1, 40), st.sampled_from(KAPPAS))
def test_reduced_fractions_give_the_same_union(Q, kappa):
    assert b1_excluded_set(Q, kappa, reduced=True) == b1_excluded_set(Q, kappa, reduced=False)


def test_b1_probability_report_at_Q2():
    rep = b1_probability_report(2, Fraction(3, 10))
    assert rep.probability == Fraction(11, 20)
    assert rep.union_bound_value == Fraction(11, 20)
    assert rep.union_bound_holds
    assert abs(rep.asymptotic_figure - (1 - 12 * 0.3 / math.pi**2)) < 1e-12
    assert not rep.asymptotic_holds


def test_union_bound_value():
    assert union_bound(2, Fraction(3, 10)) == Fraction(9, 20)


# totients

def test_sieves_match_sympy():
    phi, mu = totients(2000), mobius(2000)
    for q in range(1, 2001):
        assert phi[q] == sympy.totient(q)
        assert mu[q] == sympy.mobius(q)


def test_totient_sum_small_values():
    assert totient_sum(1) == 1
    assert totient_sum(2) == Fraction(3, 2)
    assert totient_sum(6) == sum(Fraction(int(sympy.totient(q)), q) for q in range(1, 7))


@given(st.integers(1, 3000))
def test_moebius_inversion_matches_direct(Q):
    assert totient_sum_mobius(Q) == totient_sum(Q)


def test_totient_report_small_Q_exceeds():
    r2 = totient_sum_report(2)
    assert r2.sum == Fraction(3, 2)
    assert abs(r2.asymptote - 12 / math.pi**2) < 1e-12
    assert r2.verdict == "exceeds"
    r1 = totient_sum_report(1)
    assert r1.sum == 1 and r1.verdict == "exceeds"
    assert abs(r1.asymptote - 0.6079271) < 1e-6


def test_totient_density_at_large_Q():
    r = totient_sum_report(10**5)
    assert abs(float(r.sum) / 10**5 - 6 / math.pi**2) < 1e-3


# Monte Carlo

def test_rng_points_are_partition_independent():
    whole = _rng.uniform_points(42, 0, 1000, 3)
    parts = np.concatenate([_rng.uniform_points(42, s, 250, 3) for s in range(0, 1000, 250)])
    assert np.array_equal(whole, parts)
    assert whole.min() > 0 and whole.max() < 1


def test_rng_known_vector():
    # splitmix64 reference output for state 0: 0xE220A8397B1DCDAF
    assert int(_rng.splitmix64(np.uint64(0))) == 0xE220A8397B1DCDAF


def test_mc_always_true_is_exactly_one():
    est = mc_probability(AlwaysTrue(), 5000, 9)
    assert est.estimate == 1.0 and est.radius == 0.0


def test_mc_b1_within_radius():
    est = mc_probability(B1Event(2, Fraction(3, 10)), 10**6, 2024)
    assert est.contains(Fraction(11, 20))
    assert est.unresolved == 0


def test_mc_is_deterministic_and_chunk_independent():
    ev = BnEvent(2, 5, Fraction(1, 10))
    a = mc_probability(ev, 20000, 5, chunk=20000)
    b = mc_probability(ev, 20000, 5, chunk=777)
    assert a == b


def test_mc_coverage_over_seeds():
    ev = B1Event(3, Fraction(1, 4))
    exact = exact_b1_measure(3, Fraction(1, 4))
    hits = sum(mc_probability(ev, 10**4, seed).contains(exact) for seed in range(100))
    assert hits >= 99


def test_mc_b2_above_effective_bound():
    est = mc_probability(BnEvent(2, 10, Fraction(1, 20)), 10**5, 17)
    bound = effective_lower_bounds("mum2", n=2, Q=10, kappa=Fraction(1, 20))
    assert est.estimate >= float(bound) - est.radius


def test_mc_radius_formula():
    est = mc_probability(B1Event(2, Fraction(3, 10)), 4000, 1)
    p = est.estimate
    assert est.radius == pytest.approx(4 * math.sqrt(p * (1 - p) / 4000))


def test_exact_recheck_on_boundary_points():
    # (2u+1)/2^53 grid points are exact doubles; a boundary point is resolved exactly
    ev = B1Event(2, Fraction(1, 4))
    pts = np.array([[0.125], [0.5 - 0.0625], [0.3]])
    member, unresolved = ev.evaluate(pts)
    assert unresolved == 0
    # 0.125 is at distance 1/8 = kappa/Q from 0: closed inequality keeps it
    assert member.tolist() == [True, True, True]


def test_bpsi_tail_bound_and_registry():
    ev = make_event("bpsi", n=2, kappa=0.02, eps=1)
    assert isinstance(ev, BPsiEvent)
    assert ev.tail_bound == pytest.approx(2 * 2 * 0.02 * 2 * (1 + 1 / 40) / 20)
    with pytest.raises(ValueError):
        make_event("nope")
