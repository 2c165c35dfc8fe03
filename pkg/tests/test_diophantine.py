import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from projlab.diophantine import (DiophantineError, L_alpha_points, ba_margin, cf_expand, convergents,
                                 factorization_check, factorization_residuals, frac_dist, good_approx_pairs,
                                 accumulation_values)
from projlab.exact import PHI, PHI_SQUARED, SQRT2, QuadraticIrrational
from projlab.geometry import Window

# each quotient a_i costs about 2*log10(a_i) digits of the oracle
@pytest.fixture(autouse=True, scope="module")
def _oracle_precision():
    with mpmath.workdps(400):
        yield


def mp_cf(x, n):
    out = []
    for _ in range(n):
        a = int(mpmath.floor(x))
        out.append(a)
        x = 1 / (x - a)
    return out


def test_known_expansions():
    assert cf_expand(PHI).head(6) == [1] * 6
    assert cf_expand(SQRT2).head(5) == [1, 2, 2, 2, 2]
    cf = cf_expand(Fraction(355, 113))
    assert (cf.a0, cf.quotients) == (3, (7, 16))
    assert convergents(cf, 3)[-1] == Fraction(355, 113)
    with pytest.raises(DiophantineError):
        convergents(cf, 4)


def test_convergent_examples():
    assert convergents(cf_expand(PHI), 4) == [1, 2, Fraction(3, 2), Fraction(5, 3)]
    assert convergents(cf_expand(SQRT2), 3) == [1, Fraction(3, 2), Fraction(7, 5)]


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(1, 6), st.integers(2, 60), st.integers(1, 9))
def test_quadratic_cf_matches_mpmath(a, b, d, c):
    if math.isqrt(d) ** 2 == d:
        return
    x = QuadraticIrrational(a, b, d, c)
    mp = (mpmath.mpf(a) + b * mpmath.sqrt(d)) / c
    assert cf_expand(x).head(25) == mp_cf(mp, 25)


@given(st.fractions(min_value=-50, max_value=50, max_denominator=10**6))
def test_rational_cf_round_trip(x):
    cf = cf_expand(x)
    assert not cf.quotients or cf.quotients[-1] > 1
    assert convergents(cf, cf.depth + 1)[-1] == x


def test_float_cf_stops_when_ambiguous():
    cf = cf_expand(math.e, depth=64)
    want = mp_cf(mpmath.e, cf.depth + 1)
    assert [cf.a0, *cf.quotients] == want
    assert cf.depth < 40
    with pytest.raises(DiophantineError):
        convergents(cf, cf.depth + 2)
    wide = cf_expand(math.pi, input_error=1e-3)
    assert wide.depth < cf_expand(math.pi).depth


def test_ba_margin_examples():
    m1 = ba_margin(PHI, 1)
    # nearest-integer distance of phi is 2 - phi, not its fractional part phi - 1
    assert m1.argmin == 1 and m1.margin == pytest.approx(2 - float(PHI), abs=1e-12)
    big = ba_margin(PHI, 10**4)
    assert big.argmin == 1 and big.margin == m1.margin
    # the tail settles near 1/sqrt(5)
    tail = min(m * float(frac_dist(PHI * m)) for m in range(100, 10**4 + 1))
    assert 0.44 <= tail <= 0.45
    assert ba_margin(Fraction(1, 3), 7).margin == 0 and ba_margin(Fraction(1, 3), 7).argmin == 3
    assert ba_margin(PHI, 3).argmin == 1


def test_ba_margin_exact_matches_float_loop():
    for x in (PHI, SQRT2, QuadraticIrrational(0, 1, 7)):
        m = np.arange(1, 501)
        v = m * np.abs(m * float(x) - np.round(m * float(x)))
        assert ba_margin(x, 500).margin == pytest.approx(v.min(), abs=1e-9)


def test_frac_dist():
    assert frac_dist(Fraction(7, 3)) == Fraction(1, 3)
    assert frac_dist(PHI) == 2 - PHI
    assert frac_dist(2.25) == 0.25


def test_good_pairs():
    assert good_approx_pairs(SQRT2, 3) == [(1, 1), (2, 3), (5, 7)]
    assert good_approx_pairs(PHI, 2) == [(1, 2), (2, 3)]
    for m, n in good_approx_pairs(math.e, 2):
        assert abs(m * math.e - n) < 1 / m
    brute = [(m, n) for m in range(1, 101) for n in [round(m * math.e)] if abs(m * math.e - n) < 1 / m]
    got = good_approx_pairs(math.e, 4)
    assert set(got) <= set(brute)
    with pytest.raises(DiophantineError):
        good_approx_pairs(Fraction(1, 2), 1)


def test_L_alpha_examples():
    assert L_alpha_points(2, 3, Window(Fraction(-1, 2), Fraction(1, 2))) == []
    eps = Fraction(647, 1000)
    assert eps < Fraction(2, 5) * PHI
    assert L_alpha_points(PHI_SQUARED, 200, Window(-eps, eps)) == []
    # factoring gives |phi^2 m^2 - n^2| >= margin * (2 phi - 1), which clears 0.4 phi
    assert ba_margin(PHI, 200).margin * math.sqrt(5) > 0.4 * float(PHI)


def test_L_alpha_brute_force():
    alpha = Fraction(7, 3)
    win = Window(-5, 11)
    got = L_alpha_points(alpha, 40, win)
    want = sorted(alpha * m * m - n * n for m in range(1, 41) for n in range(1, 80) if -5 < alpha * m * m - n * n < 11)
    assert [p.value for p in got] == want
    gotf = L_alpha_points(2.5, 40, win)
    wantf = sorted(2.5 * m * m - n * n for m in range(1, 41) for n in range(1, 80) if -5 < 2.5 * m * m - n * n < 11)
    assert [p.value for p in gotf] == wantf


def test_accumulation_values_for_e():
    beta = math.sqrt(math.e)
    vals = accumulation_values(beta, 10**6)
    assert len(vals) >= 3
    bound = 2 * beta + 1
    for v, m, n in vals:
        assert abs(math.e * m * m - n * n) < bound


def test_factorization():
    assert factorization_check(2.0, 3, 4) < 1e-12
    assert factorization_residuals(math.e, 300) < 1e-12
    with pytest.raises(DiophantineError):
        factorization_check(-1, 1, 1)
