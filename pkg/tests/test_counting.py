# tests/test_counting.py
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelset_lab.arcs import DyadicLevel
from levelset_lab.counting import (
    AdmissibleQuery,
    admissible_count_bound,
    admissible_oracle,
    b_witness_set,
    count_L_separated,
    count_system_solutions,
    enumerate_admissible,
    max_separated,
    solve_linear,
    system_oracle,
)
from levelset_lab.errors import GuardExceeded, InputError, SeparationError

LEVEL = DyadicLevel(4, 1)
N = 64

# 1/4 + 1/5 and 1/4 + 2/5
T_SUM = Fraction(9, 20)
X_SUM = Fraction(13, 20)


def _dpf_triples(Q):
    powers = [1 << k for k in range((2 * Q).bit_length())]
    for D in powers:
        for P in powers:
            for F in powers:
                if F <= P <= D <= 2 * Q:
                    yield D, P, F


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=-200, max_value=200),
    st.sampled_from([1, -1]),
)
def test_solve_linear_matches_brute_force(m1, m2, d, s, sign):
    if math.gcd(m1, m2) != 1:
        return
    q1, q2 = d * m1, d * m2
    brute = [
        (u1, u2)
        for u1 in range(-q1 + 1, q1)
        for u2 in range(-q2 + 1, q2)
        if u1 * m2 + sign * u2 * m1 == s
    ]
    assert solve_linear(s, m1, m2, q1, q2, sign) == brute


def test_query_validation():
    with pytest.raises(InputError):
        AdmissibleQuery(0, 0, N, LEVEL, D=2, P=4, F=1)
    with pytest.raises(InputError):
        AdmissibleQuery(0, 0, N, LEVEL, D=3, P=1, F=1)
    with pytest.raises(InputError):
        AdmissibleQuery(0, 0, N, LEVEL, D=16, P=1, F=1)
    with pytest.raises(InputError):
        AdmissibleQuery(0, 0, N, LEVEL, D=1, P=1, F=1, C_t=0)


def test_known_pair_is_admissible():
    query = AdmissibleQuery(X_SUM, T_SUM, N, LEVEL, D=1, P=1, F=1)
    pairs = enumerate_admissible(query)
    by_key = {p.key(): p for p in pairs}
    assert (4, 5) in by_key
    pair = by_key[(4, 5)]
    assert pair.d == 1
    assert any((w.a1, w.a2, w.b1, w.b2) == (1, 1, 1, 2) for w in pair.witnesses)
    assert 1 in b_witness_set(4, 5, query)


@pytest.mark.parametrize(
    "x,t",
    [
        (X_SUM, T_SUM),
        (Fraction(0), Fraction(0)),
        (Fraction(1, 3), Fraction(1, 2)),
        (Fraction(5, 7), Fraction(2, 9)),
    ],
)
def test_enumeration_matches_oracle(x, t):
    for D, P, F in _dpf_triples(LEVEL.Q):
        query = AdmissibleQuery(x, t, N, LEVEL, D=D, P=P, F=F, C_t=2, C_x=2)
        assert enumerate_admissible(query) == admissible_oracle(query), (D, P, F)


def test_enumeration_does_not_depend_on_workers():
    query = AdmissibleQuery(X_SUM, T_SUM, N, LEVEL, D=1, P=1, F=1, C_t=4, C_x=4)
    assert enumerate_admissible(query, workers=1) == enumerate_admissible(query, workers=3)


def test_b_witness_set_rejects_inadmissible_pair():
    query = AdmissibleQuery(X_SUM, T_SUM, N, LEVEL, D=1, P=1, F=1)
    with pytest.raises(InputError):
        b_witness_set(4, 4, query)


def test_admissible_guard():
    query = AdmissibleQuery(0, 0, 1 << 22, DyadicLevel(1 << 11, 0), D=1, P=1, F=1)
    with pytest.raises(GuardExceeded):
        enumerate_admissible(query)


def test_count_bound_is_positive():
    query = AdmissibleQuery(0, 0, N, LEVEL, D=4, P=2, F=1)
    # min{2, 1 + 4*2/(4*1*2)} + 64/(2*64*16*2)
    assert admissible_count_bound(query) == pytest.approx(2 + 1 / 64)


# -------------------- separated counts --------------------

def test_max_separated_greedy():
    gap = Fraction(1, 4)
    assert max_separated([(Fraction(0), Fraction(1))], gap) == 5
    assert max_separated([(Fraction(0), Fraction(0)), (Fraction(1, 8), Fraction(1, 8))], gap) == 1
    assert max_separated([(Fraction(0), Fraction(0)), (Fraction(1, 8), Fraction(3, 8))], gap) == 2
    assert max_separated([(Fraction(1), Fraction(0))], gap) == 0
    assert max_separated([], gap) == 0


def test_count_L_separated_sees_known_representation():
    query = AdmissibleQuery(X_SUM, T_SUM, N, LEVEL, D=1, P=1, F=1)
    assert count_L_separated(X_SUM, T_SUM, query) >= 1
    assert count_L_separated(X_SUM, T_SUM, query, mode="fractions") >= 1
    with pytest.raises(InputError):
        count_L_separated(X_SUM, T_SUM, query, mode="bogus")


# -------------------- two-target systems --------------------

SYS_LEVEL = DyadicLevel(4, 0)
SYS_N = 32
# 1/4 - 1/5 and 1/4 - 1/7
T1 = Fraction(1, 20)
T2 = Fraction(3, 28)


def test_system_count_matches_oracle_without_x():
    got = count_system_solutions(T1, T2, N=SYS_N, level=SYS_LEVEL, alpha_cap=8)
    assert got.total > 0
    assert got.total == system_oracle(T1, T2, N=SYS_N, level=SYS_LEVEL, alpha_cap=8)


def test_system_count_matches_oracle_with_x():
    x, xp = Fraction(-3, 20), Fraction(0)
    got = count_system_solutions(T1, T2, x, xp, N=SYS_N, level=SYS_LEVEL, alpha_cap=8, C_x=2)
    want = system_oracle(T1, T2, x, xp, N=SYS_N, level=SYS_LEVEL, alpha_cap=8, C_x=2)
    assert got.total == want


def test_system_alpha_cap_restricts():
    full = count_system_solutions(T1, T2, N=SYS_N, level=SYS_LEVEL, alpha_cap=8).total
    coprime = count_system_solutions(T1, T2, N=SYS_N, level=SYS_LEVEL, alpha_cap=1).total
    assert coprime <= full
    assert coprime == system_oracle(T1, T2, N=SYS_N, level=SYS_LEVEL, alpha_cap=1)


def test_system_errors():
    with pytest.raises(SeparationError):
        count_system_solutions(T1, T1, N=SYS_N, level=SYS_LEVEL, alpha_cap=8)
    with pytest.raises(InputError):
        count_system_solutions(T1, T2, Fraction(0), N=SYS_N, level=SYS_LEVEL, alpha_cap=8)
    with pytest.raises(GuardExceeded):
        count_system_solutions(T1, T2, N=1 << 12, level=DyadicLevel(512, 0), alpha_cap=8)
