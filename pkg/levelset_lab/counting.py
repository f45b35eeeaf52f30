# levelset_lab/counting.py
"""
Solution counting for sums and differences of arc fractions.

Every enumeration works pair-by-pair over (q1, q2): with d = gcd(q1, q2),
q_i = d m_i, the condition |a1/q1 +- a2/q2 - t| <= w fixes the integer
s = a1 m2 +- a2 m1 to a short window around t d m1 m2, and each s is solved by
the modular inverse of m2 mod m1 (the CRT split; gcd(m1, m2) = 1).
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from levelset_lab.arcs import DyadicLevel
from levelset_lab.arith import in_block, is_power_of_two
from levelset_lab.errors import GuardExceeded, InputError, SeparationError
from levelset_lab.sweep import parallel_map

log = logging.getLogger(__name__)

ADMISSIBLE_Q_CAP = 1 << 10
SYSTEM_Q_CAP = 1 << 8


# -------------------- query types --------------------

@dataclass(frozen=True)
class AdmissibleQuery:
    x: Fraction
    t: Fraction
    N: int
    level: DyadicLevel
    D: int
    P: int
    F: int
    C_t: Fraction = Fraction(1)
    C_x: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        for name in ("D", "P", "F"):
            if not is_power_of_two(getattr(self, name)):
                raise InputError(f"{name} must be a power of two")
        if not self.F <= self.P <= self.D <= 2 * self.level.Q:
            raise InputError("need F <= P <= D <= 2Q")
        if Fraction(self.C_t) <= 0 or Fraction(self.C_x) <= 0:
            raise InputError("window constants must be positive")
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "t", Fraction(self.t))
        object.__setattr__(self, "C_t", Fraction(self.C_t))
        object.__setattr__(self, "C_x", Fraction(self.C_x))

    @property
    def w_t(self) -> Fraction:
        return self.C_t / (self.level.two_l * self.N * self.level.Q)

    @property
    def w_x(self) -> Fraction:
        return self.C_x / (self.level.two_l * self.level.Q)

    def widened(self, factor: int) -> "AdmissibleQuery":
        return replace(self, C_t=self.C_t * factor, C_x=self.C_x * factor)


@dataclass(frozen=True, order=True)
class Witness:
    a1: int
    a2: int
    b1: int
    b2: int
    f: int
    p: int


@dataclass
class AdmissiblePair:
    q1: int
    q2: int
    d: int
    p: int
    witnesses: List[Witness] = field(default_factory=list)

    @property
    def p_values(self) -> Set[int]:
        return {w.p for w in self.witnesses}

    @property
    def p_invariant(self) -> bool:
        return len(self.p_values) == 1

    @property
    def f_values(self) -> Set[int]:
        return {w.f for w in self.witnesses}

    @property
    def b1_values(self) -> Set[int]:
        return {w.b1 for w in self.witnesses}

    def key(self) -> Tuple[int, int]:
        return (self.q1, self.q2)


# -------------------- linear solver --------------------

def _window(center: Fraction, width: Fraction, L: int) -> range:
    """Integers s with |s/L - center| <= width."""
    lo = math.ceil((center - width) * L)
    hi = math.floor((center + width) * L)
    return range(lo, hi + 1)


def solve_linear(s: int, m1: int, m2: int, q1: int, q2: int, sign: int = 1) -> List[Tuple[int, int]]:
    """
    All (u1, u2) with u1 m2 + sign u2 m1 = s, |u1| < q1, |u2| < q2,
    ascending in u1. Requires gcd(m1, m2) = 1.
    """
    if m1 == 1:
        r = 0
    else:
        r = (s * pow(m2, -1, m1)) % m1
    # u1 = r + k m1 within (-q1, q1)
    k_lo = math.ceil((-q1 + 1 - r) / m1)
    k_hi = math.floor((q1 - 1 - r) / m1)
    out = []
    for k in range(k_lo, k_hi + 1):
        u1 = r + k * m1
        rem = s - u1 * m2
        u2 = rem // m1 if sign == 1 else -(rem // m1)
        if abs(u2) < q2:
            out.append((u1, u2))
    return out


def _a_solutions(s: int, d: int, m1: int, m2: int, sign: int) -> List[Tuple[int, int]]:
    q1, q2 = d * m1, d * m2
    return [
        (a1, a2) for a1, a2 in solve_linear(s, m1, m2, q1, q2, sign)
        if math.gcd(a1, q1) == 1 and math.gcd(a2, q2) == 1
    ]


# -------------------- admissible pairs --------------------

def _check_admissible_guard(query: AdmissibleQuery) -> None:
    if query.level.Q > ADMISSIBLE_Q_CAP:
        raise GuardExceeded(f"Q={query.level.Q} exceeds {ADMISSIBLE_Q_CAP}")


def solve_pair(q1: int, q2: int, query: AdmissibleQuery) -> Optional[AdmissiblePair]:
    d = math.gcd(q1, q2)
    if not in_block(d, query.D):
        return None
    m1, m2 = q1 // d, q2 // d
    L = d * m1 * m2
    a_part: List[Tuple[int, int, int]] = []  # (a1, a2, p)
    for s in _window(query.t, query.w_t, L):
        p = math.gcd(s, L)
        if not in_block(p, query.P):
            continue
        a_part.extend((a1, a2, p) for a1, a2 in _a_solutions(s, d, m1, m2, 1))
    if not a_part:
        return None
    ps = sorted({p for _, _, p in a_part})
    b_part: Dict[int, List[Tuple[int, int, int]]] = {p: [] for p in ps}  # p -> (b1, b2, f)
    for sigma in _window(query.x, query.w_x, L):
        for p in ps:
            f = math.gcd(sigma, p)
            if not in_block(f, query.F):
                continue
            b_part[p].extend((b1, b2, f) for b1, b2 in solve_linear(sigma, m1, m2, q1, q2, 1))
    witnesses = sorted(
        Witness(a1, a2, b1, b2, f, p)
        for a1, a2, p in a_part
        for b1, b2, f in b_part[p]
    )
    if not witnesses:
        return None
    return AdmissiblePair(q1, q2, d, witnesses[0].p, witnesses)


def enumerate_admissible(query: AdmissibleQuery, workers: int = 1) -> List[AdmissiblePair]:
    """Admissible (q1, q2) pairs with their witnesses, ordered by (q1, q2)."""
    _check_admissible_guard(query)
    qs = list(query.level.q_values())
    rows = parallel_map(lambda q1: [solve_pair(q1, q2, query) for q2 in qs], qs, workers)
    out = [pair for row in rows for pair in row if pair is not None]
    for pair in out:
        if not pair.p_invariant:
            log.warning("pair %s carries several p values: %s", pair.key(), sorted(pair.p_values))
    return out


def admissible_oracle(query: AdmissibleQuery) -> List[AdmissiblePair]:
    """Quadruple loop over all labels; integer cross-multiplied comparisons."""
    out = []
    Q = query.level.Q
    for q1 in range(Q, 2 * Q):
        for q2 in range(Q, 2 * Q):
            d = math.gcd(q1, q2)
            if not in_block(d, query.D):
                continue
            L = q1 * q2
            T, W = query.t * L, query.w_t * L
            X, Wx = query.x * L, query.w_x * L
            a_ok = []
            for a1 in range(-q1 + 1, q1):
                if math.gcd(a1, q1) != 1:
                    continue
                for a2 in range(-q2 + 1, q2):
                    if math.gcd(a2, q2) != 1:
                        continue
                    num = a1 * q2 + a2 * q1
                    if abs(num - T) > W:
                        continue
                    p = math.gcd(num // d, L // d)
                    if in_block(p, query.P):
                        a_ok.append((a1, a2, p))
            if not a_ok:
                continue
            b_ok = []
            for b1 in range(-q1 + 1, q1):
                for b2 in range(-q2 + 1, q2):
                    num = b1 * q2 + b2 * q1
                    if abs(num - X) <= Wx:
                        b_ok.append((b1, b2, num // d))
            ws = []
            for a1, a2, p in a_ok:
                for b1, b2, bs in b_ok:
                    f = math.gcd(bs, p)
                    if in_block(f, query.F):
                        ws.append(Witness(a1, a2, b1, b2, f, p))
            if ws:
                ws.sort()
                out.append(AdmissiblePair(q1, q2, d, ws[0].p, ws))
    return out


def admissible_count_bound(query: AdmissibleQuery) -> float:
    """min{P, F + QP/(DF 2^l)} + Q^3/(2^l N D^2 P)."""
    Q, tl = query.level.Q, query.level.two_l
    D, P, F, N = query.D, query.P, query.F, query.N
    return min(P, F + Q * P / (D * F * tl)) + Q ** 3 / (tl * N * D * D * P)


# -------------------- b-witness sets --------------------

def b_witness_set(q1: int, q2: int, query: AdmissibleQuery) -> Set[int]:
    _check_admissible_guard(query)
    pair = solve_pair(q1, q2, query)
    if pair is None:
        raise InputError(f"({q1}, {q2}) is not admissible for this query")
    return pair.b1_values


def b_witness_bound(query: AdmissibleQuery) -> float:
    """D + Q/(2^l F)."""
    return query.D + query.level.Q / (query.level.two_l * query.F)


# -------------------- separated representations --------------------

def max_separated(intervals: Iterable[Tuple[Fraction, Fraction]], gap: Fraction) -> int:
    """
    Largest number of points, pairwise >= gap apart, lying in the union of the
    closed intervals. Greedy from the left: each point is the smallest
    admissible position, which is optimal on a line.
    """
    spans = sorted((lo, hi) for lo, hi in intervals if lo <= hi)
    count = 0
    last: Optional[Fraction] = None
    for lo, hi in spans:
        start = lo if last is None else max(lo, last + gap)
        if start > hi:
            continue
        k = math.floor((hi - start) / gap)
        count += k + 1
        last = start + k * gap
    return count


def _representation_intervals(x: Fraction, pairs: List[AdmissiblePair], w: Fraction,
                              mode: str) -> List[Tuple[Fraction, Fraction]]:
    spans = set()
    for pair in pairs:
        for wt in pair.witnesses:
            c1 = Fraction(wt.b1, pair.q1)
            if mode == "fractions":
                spans.add((c1, c1))
                continue
            c2 = x - Fraction(wt.b2, pair.q2)
            lo, hi = max(c1 - w, c2 - w), min(c1 + w, c2 + w)
            if lo <= hi:
                spans.add((lo, hi))
    return sorted(spans)


def count_L_separated(x, t, query: AdmissibleQuery, mode: str = "intervals", workers: int = 1) -> int:
    """
    Maximum number of 1/N-separated first components x_1 over representations
    (x, t) = (x_1, t_1) + (x_2, t_2) with each part in a cell of radius
    (w_x, w_t) at labels (q_i, a_i, b_i) of the prescribed (D, P, F).

    mode="intervals": x_1 ranges over the feasible interval of each witness.
    mode="fractions": x_1 is pinned to b1/q1, one point per distinct fraction.
    """
    if mode not in ("intervals", "fractions"):
        raise InputError(f"unknown mode: {mode}")
    q = replace(query, x=Fraction(x), t=Fraction(t))
    # sums of two cell points reach twice the cell radius
    pairs = enumerate_admissible(q.widened(2), workers=workers)
    spans = _representation_intervals(q.x, pairs, q.w_x, mode)
    return max_separated(spans, Fraction(1, q.N))


def l_separated_bound(query: AdmissibleQuery) -> float:
    """(F + QP/(DF2^l) + Q^3/(2^l N D^2 P)) (Q/2^l + D) N/(Q 2^l)."""
    Q, tl = query.level.Q, query.level.two_l
    D, P, F, N = query.D, query.P, query.F, query.N
    first = F + Q * P / (D * F * tl) + Q ** 3 / (tl * N * D * D * P)
    return first * (Q / tl + D) * N / (Q * tl)


# -------------------- two-target systems --------------------

@dataclass
class SystemCount:
    total: int
    first_hits: int
    second_hits: int


def _check_system(t: Fraction, t_prime: Fraction, w: Fraction, level: DyadicLevel) -> None:
    if level.Q > SYSTEM_Q_CAP:
        raise GuardExceeded(f"Q={level.Q} exceeds {SYSTEM_Q_CAP}")
    if abs(t - t_prime) <= 2 * w:
        raise SeparationError(f"|t - t'| = {abs(t - t_prime)} not above the window width {2 * w}")


def _difference_counts(target: Fraction, w: Fraction, x_target: Optional[Fraction],
                       wx: Fraction, level: DyadicLevel, alpha_cap: int) -> Dict[tuple, int]:
    """
    For each (q1, a1[, b1]) the number of (q2, a2[, b2]) with
    |a1/q1 - a2/q2 - target| <= w (and the b-analogue when x_target is given).
    """
    counts: Dict[tuple, int] = defaultdict(int)
    qs = list(level.q_values())
    for q1 in qs:
        for q2 in qs:
            d = math.gcd(q1, q2)
            if d > alpha_cap:
                continue
            m1, m2 = q1 // d, q2 // d
            L = d * m1 * m2
            per_a1: Dict[int, int] = defaultdict(int)
            for s in _window(target, w, L):
                for a1, _ in _a_solutions(s, d, m1, m2, -1):
                    per_a1[a1] += 1
            if not per_a1:
                continue
            if x_target is None:
                for a1, n in per_a1.items():
                    counts[(q1, a1)] += n
                continue
            per_b1: Dict[int, int] = defaultdict(int)
            for sigma in _window(x_target, wx, L):
                for b1, _ in solve_linear(sigma, m1, m2, q1, q2, -1):
                    per_b1[b1] += 1
            for a1, na in per_a1.items():
                for b1, nb in per_b1.items():
                    counts[(q1, a1, b1)] += na * nb
    return counts


def count_system_solutions(t, t_prime, x=None, x_prime=None, *, N: int, level: DyadicLevel,
                           alpha_cap: int, C_t=Fraction(1), C_x=Fraction(1)) -> SystemCount:
    """
    Tuples (a1, a2, a3, q1, q2, q3) [with b's when x, x' are given] satisfying
    |a1/q1 - a2/q2 - t| <= w and |a1/q1 - a3/q3 - t'| <= w with
    w = C_t/(N Q 2^l), gcd(q1, q2), gcd(q1, q3) <= alpha_cap.
    """
    t, t_prime = Fraction(t), Fraction(t_prime)
    if (x is None) != (x_prime is None):
        raise InputError("give both x and x' or neither")
    w = Fraction(C_t) / (N * level.Q * level.two_l)
    wx = Fraction(C_x) / (level.Q * level.two_l)
    _check_system(t, t_prime, w, level)
    xs = None if x is None else Fraction(x)
    xps = None if x_prime is None else Fraction(x_prime)
    first = _difference_counts(t, w, xs, wx, level, alpha_cap)
    second = _difference_counts(t_prime, w, xps, wx, level, alpha_cap)
    total = sum(n * second.get(k, 0) for k, n in first.items())
    return SystemCount(total, sum(first.values()), sum(second.values()))


def system_oracle(t, t_prime, x=None, x_prime=None, *, N: int, level: DyadicLevel,
                  alpha_cap: int, C_t=Fraction(1), C_x=Fraction(1)) -> int:
    """Brute force over every label; factorized per (q1, a1[, b1]) and q2."""
    t, t_prime = Fraction(t), Fraction(t_prime)
    w = Fraction(C_t) / (N * level.Q * level.two_l)
    wx = Fraction(C_x) / (level.Q * level.two_l)
    _check_system(t, t_prime, w, level)
    qs = list(level.q_values())
    units = {q: [a for a in range(-q + 1, q) if math.gcd(a, q) == 1] for q in qs}

    def na(q1, a1, q2, target):
        return sum(1 for a2 in units[q2] if abs(Fraction(a1, q1) - Fraction(a2, q2) - target) <= w)

    def nb(q1, b1, q2, target):
        return sum(1 for b2 in range(-q2 + 1, q2) if abs(Fraction(b1, q1) - Fraction(b2, q2) - target) <= wx)

    total = 0
    for q1 in qs:
        partners = [q2 for q2 in qs if math.gcd(q1, q2) <= alpha_cap]
        for a1 in units[q1]:
            if x is None:
                c1 = sum(na(q1, a1, q2, t) for q2 in partners)
                c2 = sum(na(q1, a1, q2, t_prime) for q2 in partners)
                total += c1 * c2
                continue
            a_t = {q2: na(q1, a1, q2, t) for q2 in partners}
            a_tp = {q2: na(q1, a1, q2, t_prime) for q2 in partners}
            if not any(a_t.values()) or not any(a_tp.values()):
                continue
            for b1 in range(-q1 + 1, q1):
                c1 = sum(a_t[q2] * nb(q1, b1, q2, Fraction(x)) for q2 in partners if a_t[q2])
                if not c1:
                    continue
                c2 = sum(a_tp[q2] * nb(q1, b1, q2, Fraction(x_prime)) for q2 in partners if a_tp[q2])
                total += c1 * c2
    return total


__all__ = [
    "AdmissibleQuery",
    "Witness",
    "AdmissiblePair",
    "solve_linear",
    "solve_pair",
    "enumerate_admissible",
    "admissible_oracle",
    "admissible_count_bound",
    "b_witness_set",
    "b_witness_bound",
    "max_separated",
    "count_L_separated",
    "l_separated_bound",
    "SystemCount",
    "count_system_solutions",
    "system_oracle",
]
