# levelset_lab/exp_sum.py
"""
Phase sums  sum a_n e(n x + n^2 t), the weighted kernel, sup over t on a grid,
level-set measures and L^p norms of the maximal function.

Phases come from a second-order recurrence: with phi_n = e(n x + n^2 t) and
r_n = phi_{n+1}/phi_n = e(x + (2n+1) t), we have r_{n+1} = r_n e(2t). Seeds are
recomputed exactly (rational reduction mod 1) at the start of every block, so
the work per term is one complex multiply and rounding never grows past one
block.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from levelset_lab.errors import GridError, GuardExceeded, InputError
from levelset_lab.schemes import CoefficientVector
from levelset_lab.sweep import chunked, parallel_map

MAX_N = 1 << 24
FSUM_THRESHOLD = 1 << 14
_BLOCK = 256
_ROW_BUDGET = 1 << 22  # complex entries per t-block in the sweep
TIE_RTOL = 1e-12  # values this close count as ties; the smaller t wins


# -------------------- weight --------------------

class WeightProfile:
    """w(u) = exp(1 - 1/(1 - (u/2)^2)) on |u| < 2, zero elsewhere."""

    name = "bump"

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        out = np.zeros_like(u)
        inside = np.abs(u) < 2.0
        v = 1.0 - (u[inside] / 2.0) ** 2
        out[inside] = np.exp(1.0 - 1.0 / v)
        return out

    def at_scale(self, n: np.ndarray, N: int) -> np.ndarray:
        return self(np.asarray(n, dtype=np.float64) / N)


DEFAULT_WEIGHT = WeightProfile()


@lru_cache(maxsize=32)
def _kernel_coefficients(N: int) -> np.ndarray:
    n = np.arange(-2 * N, 2 * N + 1, dtype=np.int64)
    return DEFAULT_WEIGHT.at_scale(n, N) ** 2


def kernel_mass(N: int) -> float:
    """sum_n w(n/N)^2, the value of the kernel at the origin."""
    return math.fsum(_kernel_coefficients(N))


# -------------------- scale / grid --------------------

@dataclass(frozen=True)
class ScaleParams:
    """lambda = M N^{1/4}; M is stored, lambda derived."""
    N: int
    M: float
    epsilon_c: float = 1.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise InputError("N must be >= 1")
        if not (math.isfinite(self.M) and math.isfinite(self.epsilon_c)):
            raise InputError("M and epsilon_c must be finite")
        if self.M < 0 or self.epsilon_c <= 0:
            raise InputError("M must be >= 0 and epsilon_c > 0")

    @classmethod
    def from_lambda(cls, N: int, lam: float, epsilon_c: float = 1.0) -> "ScaleParams":
        if N < 1:
            raise InputError("N must be >= 1")
        return cls(N=N, M=lam / N ** 0.25, epsilon_c=epsilon_c)

    @property
    def lambda_(self) -> float:
        return self.M * self.N ** 0.25

    def in_theorem_range(self) -> bool:
        return 1.0 <= self.M <= self.N ** 0.25 * (1 + 1e-12)

    def check_theorem_range(self) -> "ScaleParams":
        if not self.in_theorem_range():
            raise InputError(
                f"lambda={self.lambda_:.6g} outside [N^(1/4), N^(1/2)] for N={self.N}"
            )
        return self


@dataclass(frozen=True)
class GridSpec:
    """x on the 1/N grid, t on the 1/(c_t N^2) grid."""
    N: int
    c_t: int = 4
    x_count: Optional[int] = None
    t_count: Optional[int] = None

    def __post_init__(self) -> None:
        if self.N < 1 or self.c_t < 1:
            raise GridError("grid needs N >= 1 and c_t >= 1")
        if self.x_count is None:
            object.__setattr__(self, "x_count", self.N)
        if self.t_count is None:
            object.__setattr__(self, "t_count", self.c_t * self.N * self.N)
        if self.x_count < 0 or self.t_count < 0:
            raise GridError("grid counts must be non-negative")

    @property
    def x_step(self) -> Fraction:
        return Fraction(1, self.N)

    @property
    def t_step(self) -> Fraction:
        return Fraction(1, self.c_t * self.N * self.N)

    @property
    def t_period(self) -> int:
        return self.c_t * self.N * self.N

    @property
    def covers_torus(self) -> bool:
        return self.x_count == self.N and self.t_count == self.t_period

    def x_values(self) -> List[Fraction]:
        return [Fraction(k, self.N) for k in range(self.x_count)]

    def t_value(self, j: int) -> Fraction:
        return j * self.t_step


# -------------------- phases --------------------

def _exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    fv = float(v)
    if not math.isfinite(fv):
        raise InputError("x and t must be finite")
    return Fraction(fv)


def _e(theta: Fraction) -> complex:
    return cmath.exp(2j * math.pi * float(theta % 1))


def phases(n_min: int, count: int, x, t) -> np.ndarray:
    """e(n x + n^2 t) for n = n_min .. n_min + count - 1."""
    if count <= 0:
        return np.zeros(0, dtype=np.complex128)
    xf, tf = _exact(x), _exact(t)
    nb = -(-count // _BLOCK)
    starts = [n_min + _BLOCK * i for i in range(nb)]
    phi0 = np.array([_e(s * xf + s * s * tf) for s in starts], dtype=np.complex128)
    r0 = np.array([_e(xf + (2 * s + 1) * tf) for s in starts], dtype=np.complex128)
    w = _e(2 * tf)
    wpow = np.cumprod(np.concatenate(([1.0 + 0j], np.full(_BLOCK - 1, w))))
    steps = r0[:, None] * wpow[None, :]
    out = np.empty((nb, _BLOCK), dtype=np.complex128)
    out[:, 0] = phi0
    out[:, 1:] = phi0[:, None] * np.cumprod(steps[:, :-1], axis=1)
    return out.ravel()[:count]


def _check_point(N: int, x, t) -> None:
    if N < 1:
        raise InputError("N must be >= 1")
    if N > MAX_N:
        raise GuardExceeded(f"N={N} exceeds 2^24")
    for v in (x, t):
        if not isinstance(v, Fraction) and not math.isfinite(float(v)):
            raise InputError("x and t must be finite")


def _accumulate(terms: np.ndarray) -> complex:
    if terms.size > FSUM_THRESHOLD:
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return complex(np.sum(terms))


def eval_phase_sum(coeffs: CoefficientVector, weighted: bool, N: int, x, t,
                   weight: Optional[WeightProfile] = None) -> complex:
    _check_point(N, x, t)
    vals = coeffs.values
    if weighted:
        vals = vals * (weight or DEFAULT_WEIGHT).at_scale(coeffs.indices(), N)
    return _accumulate(vals * phases(coeffs.n_min, coeffs.count, x, t))


def eval_kernel(N: int, x, t) -> complex:
    """sum_{|n| <= 2N} w(n/N)^2 e(n x + n^2 t)."""
    _check_point(N, x, t)
    return _accumulate(_kernel_coefficients(N) * phases(-2 * N, 4 * N + 1, x, t))


def naive_phase_sum(coeffs: CoefficientVector, N: int, x: float, t: float, weighted: bool = False) -> complex:
    """One transcendental call per term; the reference for the recurrence."""
    n = coeffs.indices().astype(np.float64)
    vals = coeffs.values
    if weighted:
        vals = vals * DEFAULT_WEIGHT.at_scale(coeffs.indices(), N)
    return complex(np.sum(vals * np.exp(2j * np.pi * (n * x + n * n * t))))


# -------------------- sup over t --------------------

@dataclass
class SupProfile:
    """sup_t |sum| per x, with the smallest maximizing t index."""
    x_values: List[Fraction]
    sup: np.ndarray
    argmax_j: np.ndarray
    grid: GridSpec
    l1_norm: float = 0.0
    meta: dict = field(default_factory=dict)

    def argmax_t(self, i: int) -> Fraction:
        return self.grid.t_value(int(self.argmax_j[i]))


def _x_columns(coeffs: CoefficientVector, xs: Sequence[Fraction]) -> np.ndarray:
    cols = np.empty((coeffs.count, len(xs)), dtype=np.complex128)
    for k, x in enumerate(xs):
        cols[:, k] = coeffs.values * phases(coeffs.n_min, coeffs.count, x, 0)
    return cols


def _sweep_rows(coeffs: CoefficientVector, grid: GridSpec, cols: np.ndarray,
                j_lo: int, j_hi: int) -> Tuple[np.ndarray, np.ndarray]:
    """Best |sum| and its row index over t-rows [j_lo, j_hi)."""
    count = coeffs.count
    step = phases(coeffs.n_min, count, 0, grid.t_step)
    rows_per = max(1, min(j_hi - j_lo, _ROW_BUDGET // max(1, count)))
    best = np.full(cols.shape[1], -1.0)
    best_j = np.zeros(cols.shape[1], dtype=np.int64)
    for j0 in range(j_lo, j_hi, rows_per):
        c = min(rows_per, j_hi - j0)
        seed = phases(coeffs.n_min, count, 0, grid.t_value(j0))
        mult = np.empty((c, count), dtype=np.complex128)
        mult[0] = 1.0
        if c > 1:
            mult[1:] = step[None, :]
            np.cumprod(mult, axis=0, out=mult)
        rows = mult * seed[None, :]
        mags = np.abs(rows @ cols)
        top = mags.max(axis=0)
        k = np.argmax(mags >= top * (1.0 - TIE_RTOL), axis=0)
        vals = mags[k, np.arange(mags.shape[1])]
        better = vals > best * (1.0 + TIE_RTOL)
        best = np.where(better, vals, best)
        best_j = np.where(better, j0 + k, best_j)
    return best, best_j


def sup_profile(coeffs: CoefficientVector, N: int, grid: GridSpec,
                x_values: Optional[Sequence] = None, workers: int = 1) -> SupProfile:
    """sup over the t-grid for every x, one blocked matrix product per t-block."""
    if N < 1:
        raise InputError("N must be >= 1")
    if N > MAX_N:
        raise GuardExceeded(f"N={N} exceeds 2^24")
    if grid.t_step > Fraction(1, N * N):
        raise GridError("t-grid coarser than 1/N^2")
    xs = [_exact(x) for x in (grid.x_values() if x_values is None else x_values)]
    if not xs or grid.t_count == 0:
        raise GridError("empty grid")
    cols = _x_columns(coeffs, xs)
    n_parts = max(1, workers)
    parts = chunked(grid.t_count, -(-grid.t_count // n_parts))
    results = parallel_map(lambda r: _sweep_rows(coeffs, grid, cols, r[0], r[1]), parts, workers)
    best = np.full(len(xs), -1.0)
    best_j = np.zeros(len(xs), dtype=np.int64)
    for vals, js in results:  # parts ascend in t, so strict > keeps the smallest t
        better = vals > best * (1.0 + TIE_RTOL)
        best = np.where(better, vals, best)
        best_j = np.where(better, js, best_j)
    return SupProfile(xs, best, best_j, grid, l1_norm=coeffs.l1_norm())


def sup_over_t(coeffs: CoefficientVector, N: int, x, grid: GridSpec) -> Tuple[float, Fraction]:
    prof = sup_profile(coeffs, N, grid, x_values=[x])
    return float(prof.sup[0]), prof.argmax_t(0)


# -------------------- level sets / norms --------------------

def measure_from_profile(prof: SupProfile, lam: float) -> float:
    return float(np.count_nonzero(prof.sup >= lam)) / prof.grid.N


def level_set_measure(coeffs: CoefficientVector, params: ScaleParams, grid: GridSpec,
                      workers: int = 1, profile: Optional[SupProfile] = None) -> float:
    """(1/N) #{x on the grid : sup_t |sum| >= lambda}."""
    lam = params.lambda_
    if lam <= 0:
        return grid.x_count / grid.N
    if lam > coeffs.l1_norm():
        return 0.0
    prof = profile or sup_profile(coeffs, params.N, grid, workers=workers)
    return measure_from_profile(prof, lam)


def norm_from_profile(prof: SupProfile, p: float) -> float:
    if p < 1:
        raise InputError("p must be >= 1")
    return (math.fsum(prof.sup ** p) / prof.grid.N) ** (1.0 / p)


def lp_norm_of_sup(coeffs: CoefficientVector, N: int, p: float, grid: GridSpec,
                   workers: int = 1, profile: Optional[SupProfile] = None) -> float:
    if p < 1:
        raise InputError("p must be >= 1")
    prof = profile or sup_profile(coeffs, N, grid, workers=workers)
    return norm_from_profile(prof, p)


def sharpness_set_measure(N: int, Q: int, shrink: Fraction = Fraction(1, 10)) -> float:
    """Grid measure of the union over q <= Q, b of [b/q - shrink/N, b/q + shrink/N]."""
    hits = set()
    for q in range(1, Q + 1):
        for b in range(q):
            if math.gcd(b, q) != 1:
                continue
            centre = Fraction(b * N, q)
            lo = math.ceil(centre - shrink)
            hi = math.floor(centre + shrink)
            for k in range(lo, hi + 1):
                hits.add(k % N)
    return len(hits) / N


__all__ = [
    "MAX_N",
    "WeightProfile",
    "DEFAULT_WEIGHT",
    "kernel_mass",
    "ScaleParams",
    "GridSpec",
    "phases",
    "eval_phase_sum",
    "eval_kernel",
    "naive_phase_sum",
    "SupProfile",
    "sup_profile",
    "sup_over_t",
    "measure_from_profile",
    "level_set_measure",
    "norm_from_profile",
    "lp_norm_of_sup",
    "sharpness_set_measure",
]
