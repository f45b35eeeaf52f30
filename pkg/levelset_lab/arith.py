# levelset_lab/arith.py
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple

import numpy as np
from sympy import primerange, totient

from levelset_lab.errors import GuardExceeded, InputError, LabelError

# Fraction is always kept in lowest terms with a positive denominator.
ReducedFraction = Fraction

MAX_DENOMINATOR = 1 << 31
_INT64_LIMIT = 1 << 63


# -------------------- fractions --------------------

def reduce_fraction(num: int, den: int) -> ReducedFraction:
    if den == 0:
        raise InputError("denominator must be non-zero")
    return Fraction(int(num), int(den))


def mod1(v: Fraction) -> Fraction:
    """Representative in [0, 1)."""
    return v - math.floor(v)


def mod1_centered(v: Fraction) -> Fraction:
    """Representative in [-1/2, 1/2)."""
    r = mod1(v)
    return r - 1 if r >= Fraction(1, 2) else r


def torus_distance(u: Fraction, v: Fraction) -> Fraction:
    """Distance from u - v to the nearest integer."""
    r = mod1(u - v)
    return min(r, 1 - r)


def as_fraction(v) -> Fraction:
    """Accept Fraction, int, "num/den" strings, or finite floats (exactly)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise InputError("boolean is not a rational")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"not a rational: {v!r}") from e
    if isinstance(v, float):
        if not math.isfinite(v):
            raise InputError("non-finite value")
        return Fraction(v)
    raise InputError(f"unsupported rational type: {type(v).__name__}")


def format_fraction(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


# -------------------- checked integers --------------------

def log_budget(N: int, power: int) -> float:
    """(log2 N)^power, floored at 1; the slack standing in for N^eps losses."""
    return max(1.0, math.log2(N)) ** power


def check_int64(*values: int) -> None:
    """Raise if any value would overflow a signed 64-bit lane."""
    for v in values:
        if not -_INT64_LIMIT < v < _INT64_LIMIT:
            raise GuardExceeded(f"integer {v} exceeds 64-bit width")


def _check_denominator(q: int) -> None:
    if q > MAX_DENOMINATOR:
        raise GuardExceeded(f"denominator {q} exceeds 2^31")


# -------------------- dyadic / primes --------------------

def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def dyadic_block(n: int) -> int:
    """The power of two X with X <= n < 2X."""
    if n < 1:
        raise InputError("dyadic block needs n >= 1")
    return 1 << (n.bit_length() - 1)


def in_block(n: int, X: int) -> bool:
    return X <= n < 2 * X


def primes_in_block(X: int) -> List[int]:
    """Primes in [X, 2X), ascending."""
    return [int(p) for p in primerange(X, 2 * X)]


def phi(q: int) -> int:
    return int(totient(q))


def units_mod(q: int) -> List[int]:
    """Signed residues a with |a| <= q-1 and gcd(a, q) = 1 (just 0 for q = 1)."""
    if q == 1:
        return [0]
    return [a for a in range(-(q - 1), q) if math.gcd(a, q) == 1]


# -------------------- labels --------------------

@dataclass(frozen=True)
class LabeledDiff:
    """The arc cell (a, b, q) a difference of two points falls in."""
    a: int
    b: int
    q: int

    def validate(self) -> "LabeledDiff":
        if self.q < 1:
            raise LabelError(f"q >= 1 violated: q={self.q}")
        _check_denominator(self.q)
        if math.gcd(self.a, self.q) != 1:
            raise LabelError(f"gcd(a, q) = 1 violated: a={self.a}, q={self.q}")
        if abs(self.a) > self.q - 1:
            raise LabelError(f"|a| <= q-1 violated: a={self.a}, q={self.q}")
        if abs(self.b) > self.q - 1:
            raise LabelError(f"|b| <= q-1 violated: b={self.b}, q={self.q}")
        return self

    @property
    def t(self) -> Fraction:
        return Fraction(self.a, self.q)

    @property
    def x(self) -> Fraction:
        return Fraction(self.b, self.q)

    def negate(self) -> "LabeledDiff":
        return LabeledDiff(-self.a, -self.b, self.q)

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.q)


@dataclass(frozen=True)
class GcdProfile:
    d: int
    m1: int
    m2: int
    p: int
    f: int
    t_sum: ReducedFraction
    x_sum_num: int
    x_sum_den: int

    @property
    def degenerate(self) -> bool:
        """True when the x-sum numerator vanishes (then f = p)."""
        return self.x_sum_num == 0

    def key(self) -> Tuple[int, int, int]:
        return (self.d, self.p, self.f)


def gcd_profile(d1: LabeledDiff, d2: LabeledDiff) -> GcdProfile:
    d1.validate()
    d2.validate()
    q1, q2 = d1.q, d2.q
    d = math.gcd(q1, q2)
    m1, m2 = q1 // d, q2 // d
    # s = (a1 q2 + a2 q1)/d and L = q1 q2 / d
    s = d1.a * m2 + d2.a * m1
    L = d * m1 * m2
    p = math.gcd(s, L)
    bsum = d1.b * m2 + d2.b * m1
    f = math.gcd(bsum, p)
    return GcdProfile(
        d=d,
        m1=m1,
        m2=m2,
        p=p,
        f=f,
        t_sum=Fraction(s, L),
        x_sum_num=bsum // f,
        x_sum_den=(d // f) * m1 * m2,
    )


def profile_arrays(a1, q1, a2, q2, b1, b2):
    """Vectorized (d, p, f) over int64 arrays of signed labels."""
    a1, q1, a2, q2, b1, b2 = (np.asarray(v, dtype=np.int64) for v in (a1, q1, a2, q2, b1, b2))
    d = np.gcd(q1, q2)
    m1 = q1 // d
    m2 = q2 // d
    p = np.gcd(a1 * m2 + a2 * m1, d * m1 * m2)
    f = np.gcd(b1 * m2 + b2 * m1, p)
    return d, p, f


# -------------------- gauss sums --------------------

def exact_gauss_sum(a: int, q: int) -> complex:
    """sum_{n=0}^{q-1} e(a n^2 / q) by direct summation."""
    if q < 1:
        raise InputError("q must be positive")
    if math.gcd(a, q) != 1:
        raise InputError(f"gcd(a, q) must be 1: a={a}, q={q}")
    if q > (1 << 24):
        raise GuardExceeded("gauss sum direct summation capped at q <= 2^24")
    n = np.arange(q, dtype=np.int64)
    k = ((n * n) % q) * (a % q) % q
    ang = 2.0 * np.pi * k.astype(np.float64) / q
    return complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang)))


def totient_cell_count(qs: Iterable[int]) -> int:
    """sum of phi(q) * q, the q = 1 cell counted once."""
    return sum(1 if q == 1 else phi(q) * q for q in qs)


__all__ = [
    "ReducedFraction",
    "reduce_fraction",
    "mod1",
    "mod1_centered",
    "torus_distance",
    "as_fraction",
    "format_fraction",
    "log_budget",
    "check_int64",
    "is_power_of_two",
    "dyadic_block",
    "in_block",
    "primes_in_block",
    "phi",
    "units_mod",
    "LabeledDiff",
    "GcdProfile",
    "gcd_profile",
    "profile_arrays",
    "exact_gauss_sum",
    "totient_cell_count",
]
