# levelset_lab/arcs.py
"""
Major arcs. Exact rational machinery for the cells of S_{Q,l} and its dyadic
variant, best rational approximation of t, and empirical kernel-bound reports.

Cells: q in [Q, 2Q), a a unit mod q (a = 0 only for q = 1), 0 <= b < q,
  x-window  |x - b/q| <= eps_c / (2^l q)
  t-window  |t - a/q| <= 1 / (2^l q N)
  dyadic    1/(2^{l+1} q N) <= |t - a/q| < 1/(2^l q N), unless 2^l Q >= N
All distances are torus distances.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from levelset_lab.arith import (
    dyadic_block,
    format_fraction,
    is_power_of_two,
    mod1,
    torus_distance,
    totient_cell_count,
)
from levelset_lab.errors import GuardExceeded, InputError
from levelset_lab.exp_sum import eval_kernel
from levelset_lab.sweep import chunked, parallel_map

log = logging.getLogger(__name__)

ENUMERATION_GUARD = 10 ** 8
SAMPLE_DENOMINATOR = 1 << 20


# -------------------- types --------------------

@dataclass(frozen=True, order=True)
class DyadicLevel:
    Q: int
    l: int

    def __post_init__(self) -> None:
        if not is_power_of_two(self.Q):
            raise InputError(f"Q must be a power of two, got {self.Q}")
        if self.l < 0:
            raise InputError("l must be >= 0")

    @property
    def two_l(self) -> int:
        return 1 << self.l

    def q_values(self) -> range:
        return range(self.Q, 2 * self.Q)

    def is_top(self, N: int) -> bool:
        """2^l Q >= N: the dyadic annulus degenerates to the full interval."""
        return self.two_l * self.Q >= N

    def validate(self, N: int, c: int = 1) -> "DyadicLevel":
        if self.Q > N:
            raise InputError(f"Q={self.Q} exceeds N={N}")
        if self.two_l * self.Q > c * N:
            raise InputError(f"2^l Q = {self.two_l * self.Q} exceeds {c}*N = {c * N}")
        return self

    @classmethod
    def max_for(cls, Q: int, N: int) -> "DyadicLevel":
        return cls(Q, max(0, (N // Q).bit_length() - 1))


@dataclass(frozen=True)
class TorusPoint:
    """Exact rational point; differences are read modulo 1."""
    x: Fraction
    t: Fraction

    def __sub__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(self.x - other.x, self.t - other.t)

    def reduced(self) -> "TorusPoint":
        return TorusPoint(mod1(self.x), mod1(self.t))

    def as_strings(self) -> Tuple[str, str]:
        return format_fraction(self.x), format_fraction(self.t)


@dataclass(frozen=True)
class ArcCell:
    level: DyadicLevel
    q: int
    a: int
    b: int
    N: int
    epsilon_c: Fraction = Fraction(1)
    dyadic: bool = False

    @property
    def x_radius(self) -> Fraction:
        return Fraction(self.epsilon_c) / (self.level.two_l * self.q)

    @property
    def t_radius(self) -> Fraction:
        return Fraction(1, self.level.two_l * self.q * self.N)

    @property
    def x_interval(self) -> Tuple[Fraction, Fraction]:
        c = Fraction(self.b, self.q)
        return c - self.x_radius, c + self.x_radius

    @property
    def t_interval(self) -> Tuple[Fraction, Fraction]:
        c = Fraction(self.a, self.q)
        return c - self.t_radius, c + self.t_radius

    @property
    def t_annulus(self) -> Tuple[Fraction, Fraction]:
        """(inner, outer) radii; inner is 0 when the annulus is the whole interval."""
        if not self.dyadic or self.level.is_top(self.N):
            return Fraction(0), self.t_radius
        return self.t_radius / 2, self.t_radius

    def t_ok(self, t: Fraction) -> bool:
        return _t_dist_ok(torus_distance(t, Fraction(self.a, self.q)), self.t_radius,
                          self.dyadic and not self.level.is_top(self.N))

    def x_ok(self, x: Fraction) -> bool:
        return torus_distance(x, Fraction(self.b, self.q)) <= self.x_radius

    def contains(self, z: TorusPoint) -> bool:
        return self.t_ok(z.t) and self.x_ok(z.x)

    def key(self) -> Tuple[int, int, int]:
        return (self.q, self.a, self.b)


def _t_dist_ok(dist: Fraction, radius: Fraction, annulus: bool) -> bool:
    if annulus:
        return radius / 2 <= dist < radius
    return dist <= radius


# -------------------- best rational t --------------------

def convergents(t: Fraction) -> Iterator[Fraction]:
    """Continued-fraction convergents of a rational, in order."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    x = Fraction(t)
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def _cap_l(N: int, q: int) -> int:
    return max(0, (N // dyadic_block(q)).bit_length() - 1)


def best_rational_t(t, N: int) -> Tuple[Fraction, DyadicLevel]:
    """
    Smallest-denominator a/q (q <= N) with |t - a/q| <= 1/(N q), and the level l
    with |t - a/q| in (1/(2^{l+1} N q), 1/(2^l N q)], capped at 2^l <= N/Q.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    t = Fraction(t)
    for c in convergents(t):
        q = c.denominator
        if q > N:
            break
        delta = abs(t - c)
        if delta * N * q <= 1:
            cap = _cap_l(N, q)
            if delta == 0:
                l = cap
            else:
                ratio = 1 / (N * q * delta)
                l = min(cap, (ratio.numerator // ratio.denominator).bit_length() - 1)
            return c, DyadicLevel(dyadic_block(q), l)
    # a convergent with q <= N always meets the bound; unreachable for N >= 1
    raise InputError(f"no rational approximation of {t} with q <= {N}")  # pragma: no cover


# -------------------- membership --------------------

def _candidates(v: Fraction, q: int, radius: Fraction) -> List[int]:
    """Residues r mod q with torus distance of v to r/q possibly <= radius."""
    if radius * 2 >= 1:
        return list(range(q))
    v = mod1(v)
    lo = math.ceil((v - radius) * q)
    hi = math.floor((v + radius) * q)
    return sorted({r % q for r in range(lo, hi + 1)})


def _cells_at(z: TorusPoint, q: int, level: DyadicLevel, N: int, dyadic: bool,
              epsilon_c: Fraction) -> List[Tuple[Fraction, int, Fraction, int]]:
    annulus = dyadic and not level.is_top(N)
    t_rad = Fraction(1, level.two_l * q * N)
    x_rad = Fraction(epsilon_c) / (level.two_l * q)
    found = []
    for a in _candidates(z.t, q, t_rad):
        if math.gcd(a, q) != 1:
            continue
        dt = torus_distance(z.t, Fraction(a, q))
        if not _t_dist_ok(dt, t_rad, annulus):
            continue
        for b in _candidates(z.x, q, x_rad):
            dx = torus_distance(z.x, Fraction(b, q))
            if dx <= x_rad:
                found.append((dt, a, dx, b))
    return found


def arc_membership(z: TorusPoint, level: DyadicLevel, N: int, dyadic: bool = False,
                   epsilon_c=Fraction(1), all_cells: bool = False):
    """
    Witness cell for z, or None. Among qualifying cells the lexicographically
    smallest (q, a, b) wins. With all_cells=True returns every qualifying cell
    in that order.
    """
    epsilon_c = Fraction(epsilon_c)
    cells: List[ArcCell] = []
    for q in level.q_values():
        for a, b in sorted((a, b) for _, a, _, b in _cells_at(z, q, level, N, dyadic, epsilon_c)):
            cell = ArcCell(level, q, a, b, N, epsilon_c, dyadic)
            if not all_cells:
                return cell
            cells.append(cell)
    return cells if all_cells else None


def enumerate_arcs(level: DyadicLevel, N: int, dyadic: bool = False,
                   epsilon_c=Fraction(1)) -> Iterator[ArcCell]:
    total = cell_count(level)
    if total > ENUMERATION_GUARD:
        raise GuardExceeded(f"{total} cells exceeds the enumeration guard")
    eps = Fraction(epsilon_c)
    for q in level.q_values():
        units = [0] if q == 1 else [a for a in range(1, q) if math.gcd(a, q) == 1]
        for a in units:
            for b in range(q):
                yield ArcCell(level, q, a, b, N, eps, dyadic)


def cell_count(level: DyadicLevel) -> int:
    return totient_cell_count(level.q_values())


# -------------------- kernel bound report --------------------

@dataclass
class KernelSample:
    x: Fraction
    t: Fraction
    q: int
    a: int
    b: int
    l: int
    Q: int
    abs_K: float
    ratio: float
    on_arc: bool

    def as_row(self) -> Dict[str, object]:
        return {
            "x": self.x, "t": self.t, "q": self.q, "a": self.a, "b": self.b,
            "l": self.l, "Q": self.Q, "abs_K": self.abs_K, "ratio": self.ratio,
            "on_arc": self.on_arc,
        }


KERNEL_CSV_COLUMNS = ["x", "t", "q", "a", "b", "l", "Q", "abs_K", "ratio", "on_arc"]


@dataclass
class KernelReport:
    N: int
    level: DyadicLevel
    samples: List[KernelSample] = field(default_factory=list)
    off_failures: int = 0

    def _ratios(self, on: bool) -> np.ndarray:
        return np.array([s.ratio for s in self.samples if s.on_arc == on], dtype=np.float64)

    @property
    def max_on_ratio(self) -> float:
        r = self._ratios(True)
        return float(r.max()) if r.size else 0.0

    @property
    def max_off_ratio(self) -> float:
        r = self._ratios(False)
        return float(r.max()) if r.size else 0.0

    def quantiles(self, on: bool) -> Dict[str, float]:
        r = self._ratios(on)
        if not r.size:
            return {}
        qs = np.quantile(r, [0.0, 0.5, 0.9, 0.99, 1.0])
        return dict(zip(["min", "median", "p90", "p99", "max"], map(float, qs)))


def kernel_ratio_at(N: int, level: DyadicLevel, x, t) -> float:
    return abs(eval_kernel(N, x, t)) / (math.sqrt(level.two_l) * math.sqrt(N))


def _sample_on_arc(rng: np.random.Generator, N: int, level: DyadicLevel,
                   epsilon_c: Fraction) -> KernelSample:
    qs = list(level.q_values())
    q = int(qs[rng.integers(len(qs))])
    units = [0] if q == 1 else [a for a in range(1, q) if math.gcd(a, q) == 1]
    a = int(units[rng.integers(len(units))])
    b = int(rng.integers(q))
    cell = ArcCell(level, q, a, b, N, epsilon_c, dyadic=True)
    inner, outer = cell.t_annulus
    D = SAMPLE_DENOMINATOR
    u = Fraction(int(rng.integers(D)), D)
    off_t = inner + (outer - inner) * u
    if rng.integers(2):
        off_t = -off_t
    v = Fraction(int(rng.integers(-D, D + 1)), D)
    x = mod1(Fraction(b, q) + cell.x_radius * v)
    t = mod1(Fraction(a, q) + off_t)
    k = abs(eval_kernel(N, x, t))
    return KernelSample(x, t, q, a, b, level.l, level.Q, k,
                        k / (math.sqrt(level.two_l) * math.sqrt(N)), True)


def _sample_off_arc(rng: np.random.Generator, N: int, off_epsilon: Fraction,
                    attempts: int) -> Optional[KernelSample]:
    D = SAMPLE_DENOMINATOR
    for _ in range(attempts):
        x = Fraction(int(rng.integers(D)), D)
        t = Fraction(int(rng.integers(D)), D)
        frac, lev = best_rational_t(t, N)
        q = frac.denominator
        b = round(x * q) % q
        if torus_distance(x, Fraction(b, q)) <= off_epsilon / (lev.two_l * q):
            continue
        k = abs(eval_kernel(N, x, t))
        return KernelSample(x, t, q, frac.numerator % q, b, lev.l, lev.Q, k, k / math.sqrt(N), False)
    return None


def kernel_bound_report(N: int, level: DyadicLevel, sample_count: int, rng_seed: int,
                        *, epsilon_c=Fraction(1), off_epsilon=Fraction(8),
                        max_attempts: int = 200, workers: int = 1,
                        block: int = 64) -> KernelReport:
    """
    On-arc samples lie in dyadic cells of the level (ratio |K|/(2^{l/2} sqrt N));
    off-arc samples are rejection-sampled so that x sits further than
    off_epsilon/(2^l q) from every b/q, where a/q and l come from
    best_rational_t (ratio |K|/sqrt N). Sample i uses the generator seeded by
    (rng_seed, i // block), so results do not depend on the worker count.
    """
    if sample_count < 1:
        raise InputError("sample_count must be >= 1")
    level.validate(N)
    eps = Fraction(epsilon_c)
    off_eps = Fraction(off_epsilon)

    def run(rng_block: Tuple[int, int]) -> Tuple[List[KernelSample], List[KernelSample], int]:
        lo, hi = rng_block
        rng = np.random.default_rng([rng_seed, lo // block])
        on = [_sample_on_arc(rng, N, level, eps) for _ in range(lo, hi)]
        off: List[KernelSample] = []
        failures = 0
        for _ in range(lo, hi):
            s = _sample_off_arc(rng, N, off_eps, max_attempts)
            if s is None:
                failures += 1
            else:
                off.append(s)
        return on, off, failures

    parts = parallel_map(run, chunked(sample_count, block), workers)
    report = KernelReport(N=N, level=level)
    for on, off, failures in parts:
        report.samples.extend(on)
        report.samples.extend(off)
        report.off_failures += failures
    if report.off_failures:
        log.warning("kernel report: %d off-arc samples not found after %d attempts",
                    report.off_failures, max_attempts)
    return report


__all__ = [
    "DyadicLevel",
    "TorusPoint",
    "ArcCell",
    "convergents",
    "best_rational_t",
    "arc_membership",
    "enumerate_arcs",
    "cell_count",
    "KernelSample",
    "KernelReport",
    "KERNEL_CSV_COLUMNS",
    "kernel_ratio_at",
    "kernel_bound_report",
]
