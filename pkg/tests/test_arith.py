# tests/test_arith.py
import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelset_lab.arith import (
    LabeledDiff,
    as_fraction,
    dyadic_block,
    exact_gauss_sum,
    format_fraction,
    gcd_profile,
    mod1,
    mod1_centered,
    primes_in_block,
    profile_arrays,
    reduce_fraction,
    torus_distance,
    totient_cell_count,
    units_mod,
)
from levelset_lab.errors import InputError, LabelError


@st.composite
def labels(draw, max_q=60):
    q = draw(st.integers(min_value=1, max_value=max_q))
    a = draw(st.sampled_from(units_mod(q)))
    b = draw(st.integers(min_value=-(q - 1), max_value=q - 1))
    return LabeledDiff(a, b, q)


@settings(max_examples=400, deadline=None)
@given(labels(), labels())
def test_profile_invariants(l1, l2):
    pr = gcd_profile(l1, l2)
    assert pr.d % pr.p == 0
    assert math.gcd(pr.p, pr.m1) == 1
    assert math.gcd(pr.p, pr.m2) == 1
    assert pr.p % pr.f == 0
    assert pr.t_sum == l1.t + l2.t
    assert Fraction(pr.x_sum_num, pr.x_sum_den) == l1.x + l2.x


def test_profile_invariants_exhaustive_small():
    violations = 0
    for q1 in range(1, 13):
        for q2 in range(1, 13):
            for a1 in units_mod(q1):
                for a2 in units_mod(q2):
                    pr = gcd_profile(LabeledDiff(a1, 1 % q1, q1), LabeledDiff(a2, 0, q2))
                    if pr.d % pr.p or math.gcd(pr.p, pr.m1) != 1 or math.gcd(pr.p, pr.m2) != 1:
                        violations += 1
    assert violations == 0


def test_profile_examples():
    # 1/3 + 1/6 = 1/2: d = 3, p = 3
    pr = gcd_profile(LabeledDiff(1, 1, 3), LabeledDiff(1, 1, 6))
    assert (pr.d, pr.m1, pr.m2) == (3, 1, 2)
    assert pr.t_sum == Fraction(1, 2)
    assert pr.p == 3 and pr.f == 3

    # opposite fractions cancel: q1 = q2 = d and p = d
    pr = gcd_profile(LabeledDiff(2, 0, 5), LabeledDiff(-2, 0, 5))
    assert pr.t_sum == 0 and pr.p == 5 and pr.degenerate


def test_label_validation_names_condition():
    with pytest.raises(LabelError, match="gcd"):
        LabeledDiff(2, 0, 4).validate()
    with pytest.raises(LabelError, match=r"\|b\|"):
        LabeledDiff(1, 5, 5).validate()
    with pytest.raises(LabelError, match="q >= 1"):
        LabeledDiff(0, 0, 0).validate()


def test_profile_arrays_match_scalar():
    rows = [(1, 3, 1, 6, 1, 1), (-3, 8, 5, 12, 7, -2), (0, 1, 0, 1, 0, 0)]
    cols = list(zip(*rows))
    d, p, f = profile_arrays(*cols)
    for k, (a1, q1, a2, q2, b1, b2) in enumerate(rows):
        pr = gcd_profile(LabeledDiff(a1, b1, q1), LabeledDiff(a2, b2, q2))
        assert (int(d[k]), int(p[k]), int(f[k])) == pr.key()


@given(st.fractions(), st.fractions())
def test_torus_distance_symmetric_and_small(u, v):
    d = torus_distance(u, v)
    assert 0 <= d <= Fraction(1, 2)
    assert d == torus_distance(v, u)
    assert d == torus_distance(u + 3, v)


def test_mod1_representatives():
    assert mod1(Fraction(-1, 3)) == Fraction(2, 3)
    assert mod1_centered(Fraction(1, 2)) == Fraction(-1, 2)
    assert mod1_centered(Fraction(7, 4)) == Fraction(-1, 4)


def test_reduce_fraction_sign_and_zero():
    assert reduce_fraction(-2, 4) == Fraction(-1, 2)
    r = reduce_fraction(3, -6)
    assert (r.numerator, r.denominator) == (-1, 2)
    z = reduce_fraction(0, 5)
    assert (z.numerator, z.denominator) == (0, 1)
    assert reduce_fraction(-4, -6) == Fraction(2, 3)
    with pytest.raises(InputError):
        reduce_fraction(1, 0)


def test_as_fraction_inputs():
    assert as_fraction("3/12") == Fraction(1, 4)
    assert as_fraction(2) == Fraction(2)
    assert as_fraction(0.5) == Fraction(1, 2)
    assert format_fraction(Fraction(-6, 4)) == "-3/2"
    with pytest.raises(InputError):
        as_fraction(float("nan"))
    with pytest.raises(InputError):
        as_fraction("1/0")


def test_dyadic_and_primes():
    assert dyadic_block(1) == 1
    assert dyadic_block(13) == 8
    assert dyadic_block(16) == 16
    assert primes_in_block(8) == [11, 13]
    assert primes_in_block(4) == [5, 7]
    assert units_mod(1) == [0]
    assert units_mod(4) == [-3, -1, 1, 3]


def test_totient_cell_count():
    # q in [4, 8): 2*4 + 4*5 + 2*6 + 6*7
    assert totient_cell_count(range(4, 8)) == 82
    assert totient_cell_count([1]) == 1


@pytest.mark.parametrize("q", [5, 13, 29])
def test_gauss_sum_modulus(q):
    g = exact_gauss_sum(1, q)
    assert abs(abs(g) - math.sqrt(q)) < 1e-9
    # q = 1 mod 4 gives a real positive sum
    if q % 4 == 1:
        assert abs(g - math.sqrt(q)) < 1e-9
    assert cmath.isfinite(g)
