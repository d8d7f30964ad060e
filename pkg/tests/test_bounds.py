import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from wci import bounds as B
from wci.bounds import BoundParams

A0 = 2 * math.sqrt(3) / 9


# --- concentration ----------------------------------------------------------


def test_concentration_bounded_examples():
    assert B.concentration_bounded(10, 0.0, 1.0, 1) == 1.0
    assert B.concentration_bounded(100, 0.1, 1.0, 1) == pytest.approx(math.exp(-2), rel=1e-14)
    one = B.concentration_bounded(7, 0.2, 1.3, 2)
    ten = B.concentration_bounded(70, 0.2, 1.3, 2)
    assert ten == pytest.approx(one**10, rel=1e-10)


def test_concentration_unbounded_deductible_region():
    params = BoundParams(p=1, q=2, Mq=1.0, eta=0.25)
    # deductible 0.25 * R with R = 2; any t below it leaves only the miss term + 1
    assert B.concentration_unbounded(1, 0.4, params) == 1.0


def test_concentration_unbounded_example():
    # n=1: 1-(1-eta)^n = 0.25, R = eta^(-1/2) = 2, slack = 3 - 0.5 = 2.5,
    # exponent -2 * 2.5^2 / 2^2 = -3.125 (the radius enters squared, not as 16)
    params = BoundParams(p=1, q=2, Mq=1.0, eta=0.25)
    got = B.concentration_unbounded(1, 3.0, params)
    assert got == pytest.approx(0.25 + math.exp(-3.125), abs=1e-12)
    assert got == pytest.approx(0.29394, abs=1e-5)


def test_concentration_unbounded_small_eta_goes_to_one():
    vals = [B.concentration_unbounded(50, 1.0, BoundParams(p=1, q=2, Mq=1.0, eta=e)) for e in (1e-2, 1e-4, 1e-8)]
    assert all(v > 0.99 for v in vals)


# --- c_pq -------------------------------------------------------------------


def c_pq_mp(p, q):
    mpmath.mp.dps = 50
    p, q = mpmath.mpf(p), mpmath.mpf(q)
    r = mpmath.power(2, 1 / p - 1 / q)
    s = mpmath.power(2, 1 / p)
    return mpmath.power(2, 1 / q) * r / (r - 1) + s / (s - 1)


def test_c_pq_examples():
    assert B.c_pq(1, 2) == pytest.approx(6.82843, abs=1e-5)
    assert B.c_pq(1, 2) == pytest.approx(4 + 2 * math.sqrt(2), abs=1e-12)
    # the closed form evaluates to 10.88864 here
    assert B.c_pq(2, 4) == pytest.approx(float(c_pq_mp(2, 4)), rel=1e-12)
    assert B.c_pq(2, 4) == pytest.approx(10.88864, abs=1e-5)


def test_c_pq_blows_up_near_p():
    vals = [B.c_pq(1.5, 1.5 + h) for h in (1e-1, 1e-2, 1e-3)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 1e3


def test_c_pq_requires_q_gt_p():
    with pytest.raises(ValueError, match="requires q > p"):
        B.c_pq(2, 2)


def test_c_pq_matches_high_precision():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = float(rng.uniform(1, 4))
        q = p + float(rng.uniform(0.05, 5))
        assert B.c_pq(p, q) == pytest.approx(float(c_pq_mp(p, q)), rel=1e-12)


# --- expectation bounds -----------------------------------------------------


def test_expectation_d3():
    params = BoundParams(p=1, q=2, d=3)
    assert B.expectation_bound_d3(1000, params, 1.0) == pytest.approx(0.1, rel=1e-12)
    assert B.expectation_bound_d3(100, BoundParams(p=1, q=2, d=3, kappa=2), 0.5) == pytest.approx(
        B.expectation_bound_d3(100, params, 1.0), rel=1e-14
    )
    vals = [B.expectation_bound_d3(n, params, 1.0) for n in (10, 100, 10**4, 10**8)]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize(
    "kw, msg",
    [
        (dict(p=1, q=2, d=2), "d >= 3"),
        (dict(p=2, q=5, d=4), "p < d/2"),
        (dict(p=1, q=1.4, d=3), r"q > d\*p/\(d-p\)"),
    ],
)
def test_expectation_d3_ranges(kw, msg):
    with pytest.raises(ValueError, match=msg):
        B.expectation_bound_d3(10, BoundParams(**kw), 1.0)


def test_covering():
    assert B.covering_number_unit_square(1) == pytest.approx(A0 + 8 / math.pi + 16, rel=1e-14)
    assert B.covering_number_unit_square(1) == pytest.approx(18.9314, abs=1e-4)
    assert B.covering_number_unit_square(0.5) == pytest.approx(22.6325, abs=1e-4)
    assert B.covering_number_unit_square(1e9) == pytest.approx(16, abs=1e-8)


def eps_bar_roots_p1(n):
    # eps^4 - 16/n eps^2 - 8/(pi n) eps - A0/n, largest real root
    r = np.roots([1, 0, -16 / n, -8 / (math.pi * n), -A0 / n])
    return max(x.real for x in r if abs(x.imag) < 1e-12 and x.real > 0)


def test_eps_bar_paper_value():
    s = B.solve_eps_bar(10**6, 1)
    assert abs(s.eps_bar - 0.026) <= 0.001
    assert s.eps_bar == pytest.approx(eps_bar_roots_p1(10**6), rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 17, 18, 19, 1000, 10**6, 10**9])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_eps_bar_residual_and_oracle(n, p):
    s = B.solve_eps_bar(n, p)
    assert s.eps_bar > 0
    assert abs(s.residual) <= 1e-12 * max(1, 1 / n)
    f = lambda e: B.eps_bar_residual(e, n, p)
    want = brentq(f, 1e-12, 100, xtol=1e-15, rtol=1e-15)
    assert s.eps_bar == pytest.approx(want, rel=1e-12)


def test_eps_bar_small_n_exceeds_one():
    assert B.solve_eps_bar(1, 1).eps_bar > 1
    assert B.solve_eps_bar(1, 1).eps_bar == pytest.approx(eps_bar_roots_p1(1), rel=1e-12)


def test_eps_bar_decreasing():
    prev = math.inf
    for k in range(0, 11):
        e = B.solve_eps_bar(10**k, 1).eps_bar
        assert e < prev
        prev = e


def test_expectation_2d():
    assert B.expectation_bound_2d(10**6, 1) == pytest.approx(12 * B.solve_eps_bar(10**6, 1).eps_bar)
    assert B.expectation_bound_2d(10**6, 1) == pytest.approx(0.312, abs=0.012)
    assert B.expectation_bound_2d(10**6, 2) == pytest.approx(84 * B.solve_eps_bar(10**6, 2).eps_bar ** 2)
    vals = [B.expectation_bound_2d(n, 1) for n in (10, 1000, 10**5)]
    assert vals == sorted(vals, reverse=True)


# --- two-sample bound -------------------------------------------------------


def test_two_sample_null_examples():
    assert B.two_sample_null_bound(100, 0.0, 1.0, 1) == 1.0
    # 2 exp(-2 * 1000 * 0.5^2 / (4^2 * 1)) = 2 exp(-31.25)
    assert B.two_sample_null_bound(1000, 0.5, 1.0, 1) == pytest.approx(2 * math.exp(-31.25), rel=1e-12)
    vals = [B.two_sample_null_bound(300, 0.5, D, 1) for D in (0.5, 1, 2, 4)]
    assert vals == sorted(vals)


def test_epsilon_for_level_inverts():
    for n, D, p, a in [(100, 1.0, 1, 0.05), (5000, 2.3, 2, 0.01), (7, 0.1, 1.5, 0.5)]:
        eps = B.epsilon_for_level(n, D, p, a)
        assert B.two_sample_null_bound(n, eps, D, p) == pytest.approx(a, rel=1e-9)


def test_min_samples_null_is_smallest():
    for eps, D, p, a in [(0.5, 1.0, 1, 0.05), (0.2, 1.6, 1, 0.01), (0.3, 1.0, 2, 0.1)]:
        n = B.min_samples_null(eps, D, p, a)
        assert B.two_sample_null_bound(n, eps, D, p) <= a
        assert n == 1 or B.two_sample_null_bound(n - 1, eps, D, p) > a


# --- sample-size calculators ------------------------------------------------


def test_min_samples_d3_example():
    params = BoundParams(p=1, d=3, kappa=1.0)
    assert B.min_samples_d3(1.0, params, 1.0) == 512


def test_min_samples_d3_scaling():
    params = BoundParams(p=1, d=3)
    base = B.min_samples_d3(0.3, params, 1.0)
    half = B.min_samples_d3(0.6, params, 1.0)
    assert abs(half - base / 8) <= 1
    k2 = B.min_samples_d3(0.3, BoundParams(p=1, d=3, kappa=2.0), 1.0)
    assert abs(k2 - 8 * base) <= 8


@settings(max_examples=80, deadline=None)
@given(
    st.floats(0.01, 5.0),
    st.floats(1.0, 1.45),
    st.integers(3, 6),
    st.floats(0.2, 5.0),
    st.floats(0.2, 3.0),
)
def test_min_samples_d3_defining_inequality(eps, p, d, kappa, moment):
    params = BoundParams(p=p, d=d, kappa=kappa)
    n = B.min_samples_d3(eps, params, moment)
    lhs = lambda m: (kappa * moment * m ** (-1 / d)) ** p
    rhs = 0.5 * (eps / 4) ** p
    assert lhs(n) <= rhs * (1 + 1e-9)
    assert n == 1 or lhs(n - 1) > rhs * (1 - 1e-9)


def test_min_samples_2d_paper_crosscheck():
    # (9+3) eps_bar <= eps/8 with eps_bar(10^6) ~ 0.026 -> eps = 96 * 0.026
    n = B.min_samples_2d(96 * 0.026, 1)
    assert 0.9e6 <= n <= 1.1e6


@pytest.mark.parametrize("eps, p", [(5.0, 1), (1.0, 1), (0.5, 2), (2.0, 1.5)])
def test_min_samples_2d_defining_inequality(eps, p):
    n = B.min_samples_2d(eps, p)
    target = 0.5 * (eps / 4) ** p
    assert B.expectation_bound_2d(n, p) <= target
    assert n == 1 or B.expectation_bound_2d(n - 1, p) > target


def test_min_samples_2d_monotone_and_floor():
    assert B.min_samples_2d(1e6, 1) == 1
    a, b = B.min_samples_2d(2.0, 1), B.min_samples_2d(1.0, 1)
    assert b > a


# --- probability ranges -----------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 10**7),
    st.floats(0, 10),
    st.floats(1e-3, 10),
    st.floats(1, 4),
    st.floats(1e-3, 0.999),
    st.floats(0.01, 5),
)
def test_probabilities_in_unit_interval(n, t, D, p, eta, dq):
    vals = [
        B.concentration_bounded(n, t, D, p),
        B.two_sample_null_bound(n, t, D, p),
        B.concentration_unbounded(n, t, BoundParams(p=p, q=p + dq, Mq=D, eta=eta)),
    ]
    for v in vals:
        assert 0.0 <= v <= 1.0


# --- composed pair bound ------------------------------------------------------


def test_pair_bound_bounded_side_condition():
    params = BoundParams(p=1, d=2, D=1.0)
    small = B.pair_deviation_bound(100, 0.5, params)
    assert small.value is None and small.side_condition_met is False
    assert "n too small" in small.reason
    relaxed = B.pair_deviation_bound(100, 0.5, params, require_side_condition=False)
    assert relaxed.value == B.two_sample_null_bound(100, 0.5, 1.0, 1)
    big = B.pair_deviation_bound(10**9, 0.5, params)
    assert big.side_condition_met and big.value == B.two_sample_null_bound(10**9, 0.5, 1.0, 1)


def test_pair_bound_d3_side_condition_uses_kappa_and_moment():
    params = BoundParams(p=1, q=2, d=3, D=2.0, Mq=1.0)
    # (kappa M n^(-1/3)) <= (eps/2)/2 = 0.125 at eps = 0.5 needs n >= 512
    assert B.pair_deviation_bound(511, 0.5, params).value is None
    ok = B.pair_deviation_bound(512, 0.5, params)
    assert ok.value is not None and ok.notes


def test_pair_bound_unbounded_chain():
    params = BoundParams(p=1, q=4, d=3, Mq=0.1, eta=1e-6)
    b = B.pair_deviation_bound(10**6, 1.0, params)
    assert b.chain == "unbounded"
    level, tail = B.corollary_tail_d3(10**6, 0.5 - b_level(params), params)
    assert b.value == pytest.approx(min(1.0, 2 * tail))
    bad = B.pair_deviation_bound(10, 1.0, BoundParams(p=1, q=4, d=3, Mq=10.0, eta=0.5))
    assert bad.value is None and "moment level" in bad.reason


def b_level(params):
    level, _ = B.corollary_tail_d3(10**6, 0.0, params)
    return level


def test_pair_bound_needs_constants():
    assert B.pair_deviation_bound(10, 0.5, None).value is None
    assert B.pair_deviation_bound(10, 0.5, BoundParams(p=1)).value is None
    assert B.pair_deviation_bound(10, 0.0, BoundParams(p=1)).value == 1.0


@pytest.mark.parametrize(
    "kw",
    [dict(p=0.5), dict(q=1.0), dict(D=0), dict(eta=1.0), dict(kappa=0), dict(Mq=-1)],
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        BoundParams(**kw)
