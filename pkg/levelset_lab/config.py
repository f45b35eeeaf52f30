# levelset_lab/config.py
"""
Probe configuration.

ProbeConfig is the JSON document accepted by `levelset-lab probe --config`.
Exact rationals (C_t, C_x, shrink, epsilon_c) are written as "num/den" strings
and read back from strings, ints or floats, so a dumped config validates to an
equal object.

Environment:
  LAB_WORKERS     sweep worker threads (default 1)
  LAB_SEED        overrides the config seed when set
  LAB_OUT_DIR     default output directory (./out)
  LAB_LOG_BUDGET  default log power for bound checks (3)
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    field_validator,
    model_validator,
)

from levelset_lab.arith import as_fraction, format_fraction, is_power_of_two
from levelset_lab.errors import ConfigInvalid, ConfigMissing, GuardExceeded, InputError
from levelset_lab.exp_sum import MAX_N
from levelset_lab.schemes import SCHEMES

PROBE_KINDS = ("levelset", "lp", "conditional", "case_bounds")
SYSTEM_Q_CAP = 1 << 8


def _to_fraction(v: Any) -> Fraction:
    try:
        return as_fraction(v)
    except (InputError, ValueError, TypeError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational: {v!r} ({e})") from None


Rational = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(format_fraction, return_type=str),
]


# -------------------- probe config --------------------

class ProbeConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid", frozen=True)

    probe: Literal["levelset", "lp", "conditional", "case_bounds"] = "levelset"

    # scale and grid
    N: int = 1 << 8
    M: Optional[float] = None
    lambda_exponents: List[float] = Field(default_factory=lambda: [0.25, 0.3, 0.36, 0.4, 0.45, 0.5])
    c_t: int = 4
    x_count: Optional[int] = None
    epsilon_c: Rational = Fraction(1)

    # coefficients
    scheme: str = "constant_normalized"
    schemes: List[str] = Field(
        default_factory=lambda: ["constant_normalized", "unimodular_random", "prime_support_cubic"]
    )
    theta: float = 0.3

    # ladders
    p: float = 6.0
    N_ladder: List[int] = Field(default_factory=lambda: [1 << k for k in range(8, 13)])
    sharp_Q: List[int] = Field(default_factory=lambda: [8, 16])
    levels: List[Tuple[int, int]] = Field(default_factory=lambda: [(32, 3)])

    # constants
    C_t: Rational = Fraction(1)
    C_x: Rational = Fraction(1)
    shrink: Rational = Fraction(1, 10)
    slack: float = 1.0
    log_budget: int = 3
    bound_constant: float = 32.0
    sanity_constant: float = 16.0
    exponent_window: Tuple[float, float] = (0.28, 0.40)

    # conditional counting
    alpha_cap: int = 4
    samples: int = 100
    betas: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2])
    four_inequality: bool = True

    # run
    seed: int = 0
    workers: int = 1
    out_dir: str = "out"

    @field_validator("N")
    @classmethod
    def _check_N(cls, v: int) -> int:
        if v < 1:
            raise ValueError("N must be >= 1")
        return v

    @field_validator("scheme")
    @classmethod
    def _check_scheme(cls, v: str) -> str:
        if v not in SCHEMES:
            raise ValueError(f"unknown coefficient scheme: {v}")
        return v

    @field_validator("schemes")
    @classmethod
    def _check_schemes(cls, v: List[str]) -> List[str]:
        bad = [s for s in v if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown coefficient schemes: {bad}")
        return v

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, v: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        for Q, l in v:
            if not is_power_of_two(Q) or l < 0:
                raise ValueError(f"level (Q={Q}, l={l}) needs Q a power of two and l >= 0")
        return v

    @model_validator(mode="after")
    def _check_ranges(self) -> "ProbeConfig":
        if self.c_t < 1 or self.workers < 1 or self.samples < 0 or self.log_budget < 0:
            raise ValueError("c_t, workers must be >= 1; samples, log_budget >= 0")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.M is not None and self.M < 0:
            raise ValueError("M must be >= 0")
        lo, hi = self.exponent_window
        if lo > hi:
            raise ValueError("exponent_window must be (low, high)")
        return self

    # -- guards (checked before dispatch, raise GuardExceeded) --
    def check_guards(self) -> "ProbeConfig":
        for n in [self.N, *self.N_ladder]:
            if n > MAX_N:
                raise GuardExceeded(f"N={n} exceeds 2^24")
        if self.probe == "conditional":
            for Q, _ in self.levels:
                if Q > SYSTEM_Q_CAP:
                    raise GuardExceeded(f"Q={Q} exceeds the system cap 2^8")
        return self

    def with_overrides(self, **overrides: Any) -> "ProbeConfig":
        """New config with the non-None overrides applied (re-validated)."""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return ProbeConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigInvalid(str(e)) from None

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


# -------------------- loading --------------------

def load_config(path: str | Path) -> ProbeConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigMissing(f"config not found: {p}")
    try:
        return ProbeConfig.model_validate_json(p.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigInvalid(f"{p}: {e}") from None


# -------------------- env settings --------------------

@dataclass
class LabSettings:
    workers: int = 1
    seed: Optional[int] = None
    out_dir: str = "out"
    log_budget: int = 3


def load_settings_from_env() -> LabSettings:
    seed = os.getenv("LAB_SEED", "").strip()
    return LabSettings(
        workers=max(1, int(os.getenv("LAB_WORKERS", "1"))),
        seed=int(seed) if seed else None,
        out_dir=os.getenv("LAB_OUT_DIR", "out").strip() or "out",
        log_budget=int(os.getenv("LAB_LOG_BUDGET", "3")),
    )


def resolve_config(path: Optional[str | Path] = None, **overrides: Any) -> ProbeConfig:
    """
    Config file (or defaults), then environment settings, then explicit
    overrides. Env values only replace fields the file left at their default.
    """
    cfg = load_config(path) if path else ProbeConfig()
    env = load_settings_from_env()
    explicit = cfg.model_fields_set
    from_env: Dict[str, Any] = {}
    if "workers" not in explicit:
        from_env["workers"] = env.workers
    if "out_dir" not in explicit:
        from_env["out_dir"] = env.out_dir
    if "log_budget" not in explicit:
        from_env["log_budget"] = env.log_budget
    if env.seed is not None:
        from_env["seed"] = env.seed
    from_env.update({k: v for k, v in overrides.items() if v is not None})
    return cfg.with_overrides(**from_env) if from_env else cfg


__all__ = [
    "PROBE_KINDS",
    "Rational",
    "ProbeConfig",
    "load_config",
    "LabSettings",
    "load_settings_from_env",
    "resolve_config",
]
