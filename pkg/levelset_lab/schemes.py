# levelset_lab/schemes.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from sympy import primerange

from levelset_lab.errors import InputError

SCHEME_TAGS = (
    "constant_normalized",
    "unimodular_random",
    "single_frequency",
    "prime_support_cubic",
    "custom",
)


@dataclass
class CoefficientVector:
    """a_n for n_min <= n <= n_max; zero outside."""
    n_min: int
    n_max: int
    values: np.ndarray
    scheme_tag: str = "custom"
    theta: Optional[float] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.n_max < self.n_min:
            raise InputError("n_max must be >= n_min")
        if self.values.shape != (self.n_max - self.n_min + 1,):
            raise InputError(
                f"expected {self.n_max - self.n_min + 1} values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InputError("coefficients must be finite")
        if self.scheme_tag not in SCHEME_TAGS:
            raise InputError(f"unknown scheme tag: {self.scheme_tag}")

    @property
    def count(self) -> int:
        return self.n_max - self.n_min + 1

    def l2_norm(self) -> float:
        return math.sqrt(math.fsum(np.abs(self.values) ** 2))

    def l1_norm(self) -> float:
        return math.fsum(np.abs(self.values))

    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1, dtype=np.int64)


# -------------------- builders --------------------

def constant_normalized(N: int, **_: object) -> CoefficientVector:
    return CoefficientVector(1, N, np.full(N, 1.0 / math.sqrt(N)), "constant_normalized")


def unimodular_random(N: int, seed: int = 0, **_: object) -> CoefficientVector:
    rng = np.random.default_rng(seed)
    phases = np.exp(2j * np.pi * rng.random(N))
    return CoefficientVector(1, N, phases / math.sqrt(N), "unimodular_random", meta={"seed": seed})


def single_frequency(N: int, **_: object) -> CoefficientVector:
    return CoefficientVector(1, 1, np.array([1.0 + 0j]), "single_frequency")


def prime_support_cubic(N: int, theta: float = 0.3, **_: object) -> CoefficientVector:
    """e(n^3 theta) on the primes n <= N, unit l2-norm."""
    primes = np.array(list(primerange(2, N + 1)), dtype=np.int64)
    if primes.size == 0:
        raise InputError(f"no primes up to N={N}")
    vals = np.zeros(N, dtype=np.complex128)
    th = Fraction(theta)
    cubes = np.array([float((int(p) ** 3 * th) % 1) for p in primes])
    vals[primes - 1] = np.exp(2j * np.pi * cubes)
    vals /= math.sqrt(primes.size)
    return CoefficientVector(1, N, vals, "prime_support_cubic", theta=theta)


def custom(values: Sequence[complex], n_min: int = 1, normalize: bool = False) -> CoefficientVector:
    arr = np.asarray(values, dtype=np.complex128)
    if normalize:
        norm = math.sqrt(math.fsum(np.abs(arr) ** 2))
        if norm == 0:
            raise InputError("cannot normalize a zero vector")
        arr = arr / norm
    return CoefficientVector(n_min, n_min + arr.size - 1, arr, "custom")


SCHEMES: Dict[str, Callable[..., CoefficientVector]] = {
    "constant_normalized": constant_normalized,
    "unimodular_random": unimodular_random,
    "single_frequency": single_frequency,
    "prime_support_cubic": prime_support_cubic,
}


def available_schemes() -> List[str]:
    return sorted(SCHEMES)


def get_scheme(name: str) -> Callable[..., CoefficientVector]:
    try:
        return SCHEMES[name]
    except KeyError:
        raise InputError(f"unknown coefficient scheme: {name}") from None


def make_coefficients(name: str, N: int, *, theta: float = 0.3, seed: int = 0) -> CoefficientVector:
    if N < 1:
        raise InputError("N must be >= 1")
    return get_scheme(name)(N, theta=theta, seed=seed)


__all__ = [
    "CoefficientVector",
    "SCHEMES",
    "SCHEME_TAGS",
    "available_schemes",
    "get_scheme",
    "make_coefficients",
    "constant_normalized",
    "unimodular_random",
    "single_frequency",
    "prime_support_cubic",
    "custom",
]
