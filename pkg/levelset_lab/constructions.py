# levelset_lab/constructions.py
"""
Explicit point configurations with the parameters they are expected to show.

Every builder returns a `Construction`: the points, the N and level they live
at, an optional explicit edge rule, and the predicted metrics, each tagged
with where the prediction comes from ("stated" for claims made about the
example, "derived" for quantities recomputed from the construction itself).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from sympy import isprime

from levelset_lab.arcs import DyadicLevel, TorusPoint
from levelset_lab.arith import (
    GcdProfile,
    LabeledDiff,
    dyadic_block,
    format_fraction,
    gcd_profile,
    is_power_of_two,
    mod1_centered,
    primes_in_block,
)
from levelset_lab.counting import Witness, max_separated
from levelset_lab.errors import ConstructionError, LabelError
from levelset_lab.graph_lab import EdgeRule, check_separation

log = logging.getLogger(__name__)

KINDS = (
    "sharp_c1",
    "enemies",
    "fixed_denominator",
    "prime_reciprocal",
    "prime_reciprocal_modified",
    "bipartite",
    "sqrt_admissible",
    "random_baseline",
    "x_only",
)

MAX_BASELINE = 1 << 12


@dataclass
class Prediction:
    value: object
    source: str  # "stated" | "derived"
    note: str = ""

    def as_dict(self) -> Dict[str, object]:
        v = self.value
        if isinstance(v, Fraction):
            v = format_fraction(v)
        elif isinstance(v, tuple):
            v = list(v)
        return {"value": v, "source": self.source, "note": self.note}


@dataclass
class Construction:
    kind: str
    params: Dict[str, object]
    N: int
    level: DyadicLevel
    points: List[TorusPoint] = field(default_factory=list)
    predicted: Dict[str, Prediction] = field(default_factory=dict)
    edge_rule: Optional[EdgeRule] = None
    rule_name: Optional[str] = None

    @property
    def R(self) -> int:
        return len(self.points)

    def validate(self) -> "Construction":
        check_separation(self.points, self.N)
        return self

    def as_json(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "params": {k: format_fraction(v) if isinstance(v, Fraction) else v for k, v in self.params.items()},
            "N": self.N,
            "Q": self.level.Q,
            "l": self.level.l,
            "rule": self.rule_name,
            "points": [list(p.as_strings()) for p in self.points],
            "predicted": {k: p.as_dict() for k, p in sorted(self.predicted.items())},
        }


def _require_prime(q: int, name: str = "q") -> None:
    if not isprime(q):
        raise ConstructionError(f"{name}={q} is not prime")


def _sqrt_block(Q: int) -> int:
    """Largest power of two <= sqrt(Q)."""
    return 1 << (max(1, math.isqrt(Q)).bit_length() - 1)


# -------------------- edge rules --------------------

def fixed_denominator_rule(q: int) -> EdgeRule:
    def rule(u: TorusPoint, v: TorusPoint) -> bool:
        return math.gcd(int((u.t - v.t) * q), q) == 1
    return rule


def distinct_denominator_rule(u: TorusPoint, v: TorusPoint) -> bool:
    return u.t.denominator != v.t.denominator


def modified_reciprocal_rule(d: int) -> EdgeRule:
    # vertices carry t = 1/(d q)
    def rule(u: TorusPoint, v: TorusPoint) -> bool:
        qu, qv = u.t.denominator // d, v.t.denominator // d
        return math.gcd(qu - qv, d) == 1
    return rule


def bipartite_rule(side: Dict[Tuple[Fraction, Fraction], int]) -> EdgeRule:
    def rule(u: TorusPoint, v: TorusPoint) -> bool:
        return side[(u.x, u.t)] != side[(v.x, v.t)]
    return rule


# -------------------- sharp example --------------------

def build_sharp_c1(N: int, q_prime: int, level: DyadicLevel, M: float) -> Construction:
    """
    Points (x_i + j/(Q 2^l), b/q), 2 <= j <= J, J = floor(2^{l/2}/M^2), with x_i a
    greedy 1/N-separated family in [b/q - h, b/q + h), h = 1/(2 Q 2^l).
    """
    _require_prime(q_prime)
    if dyadic_block(q_prime) != level.Q:
        raise ConstructionError(f"q={q_prime} is not in the block of Q={level.Q}")
    level.validate(N)
    J = math.floor(math.sqrt(level.two_l) / (M * M))
    if J < 2:
        raise ConstructionError(f"J = floor(2^(l/2)/M^2) = {J} leaves no j in [2, J]")
    step = Fraction(1, level.Q * level.two_l)
    h = step / 2
    per_b = int(step * N)
    if (J + 1) * step + Fraction(1, N) > Fraction(1, q_prime):
        raise ConstructionError("shifted neighbourhoods of neighbouring b/q overlap")
    pts = []
    for b in range(q_prime):
        centre = Fraction(b, q_prime)
        for k in range(per_b):
            x = centre - h + Fraction(k, N)
            for j in range(2, J + 1):
                pts.append(TorusPoint(x + j * step, centre))
    R = len(pts)
    c = Construction(
        "sharp_c1",
        {"q": q_prime, "M": M, "J": J},
        N, level, pts,
        {
            "R": Prediction(J * N // level.two_l, "stated", "R ~ J N / 2^l"),
            "R_exact": Prediction(R, "derived"),
            "cross_pairs": Prediction(R * R // J, "stated", "~ R^2 / J pairs in S_{Q,l}"),
            "pair_fraction_floor": Prediction(Fraction(1, 2 * J), "derived"),
        },
    )
    return c.validate()


# -------------------- enemies --------------------

@dataclass
class EnemyMember:
    q1: int
    a1: int
    b1: int
    a2: int
    b2: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.b1, self.q1)

    def labels(self) -> Tuple[LabeledDiff, LabeledDiff]:
        return LabeledDiff(self.a1, self.b1, self.q1), LabeledDiff(self.a2, self.b2, self.q1)


@dataclass
class EnemyFamily:
    x: Fraction
    t: Fraction
    N: int
    Q: int
    members: List[EnemyMember]

    @property
    def fractions(self) -> List[Fraction]:
        return sorted({m.fraction for m in self.members})

    @property
    def size(self) -> int:
        return len(self.fractions)

    @property
    def min_gap(self) -> Optional[Fraction]:
        fr = self.fractions
        if len(fr) < 2:
            return None
        return min(b - a for a, b in zip(fr, fr[1:]))

    def separated_count(self) -> int:
        return max_separated(((f, f) for f in self.fractions), Fraction(1, self.N))


def build_enemies(N: int, Q: int, q: int, r: int, a: int, b: int = 1) -> EnemyFamily:
    """
    t = a/q, x = b/(r q). For every n = r m with n q in [Q, 2Q) and every b1
    prime to n q: t = a1/(nq) + (na - a1)/(nq), x = b1/(nq) + (mb - b1)/(nq).
    """
    if not 1 <= q <= Q:
        raise ConstructionError("need 1 <= q <= Q")
    if not 1 <= r <= Q // q:
        raise ConstructionError("need 1 <= r <= Q/q")
    if r * q * N < Q * Q:
        raise ConstructionError("need r q >= Q^2 / N")
    if not 0 <= a <= q - 1 or not 0 <= b <= q - 1:
        raise ConstructionError("need 0 <= a, b <= q - 1")
    t = Fraction(a, q)
    x = Fraction(b, r * q)
    members: List[EnemyMember] = []
    n_lo = -(-Q // q)
    for n in range(n_lo, 2 * Q):
        if n * q >= 2 * Q:
            break
        if n * q < Q or n % r:
            continue
        m = n // r
        q1 = n * q
        a1 = next((c for c in range(1, q1) if math.gcd(c, q1) == 1 and math.gcd(n * a - c, q1) == 1), None)
        if a1 is None:
            log.debug("no coprime split of %d/%d at n=%d", a, q, n)
            continue
        for b1 in range(1, q1):
            if math.gcd(b1, q1) != 1:
                continue
            member = EnemyMember(q1, a1, b1, n * a - a1, m * b - b1)
            l1, l2 = member.labels()
            l1.validate()
            l2.validate()
            if l1.t + l2.t != t or l1.x + l2.x != x:
                raise ConstructionError(f"member {member} does not represent ({x}, {t})")
            members.append(member)
    fam = EnemyFamily(x, t, N, Q, members)
    gap = fam.min_gap
    if gap is not None and gap < Fraction(1, N):
        raise ConstructionError(f"family gap {gap} below 1/N")
    return fam


def enemies_size_floor(Q: int, q: int, r: int) -> float:
    return Q * Q / (r * q) / (8 * math.log2(Q))


# -------------------- K ~ 1 graphs --------------------

def build_fixed_denominator(q_prime: int, N: int = 1 << 10) -> Construction:
    """Vertices (a/q, a/q), |a| <= q - 1; edges when gcd(a2 - a1, q) = 1."""
    _require_prime(q_prime)
    if q_prime > 1 << 10:
        raise ConstructionError("q must be <= 2^10")
    Q = dyadic_block(q_prime)
    pts = [TorusPoint(Fraction(a, q_prime), Fraction(a, q_prime)) for a in range(-q_prime + 1, q_prime)]
    c = Construction(
        "fixed_denominator", {"q": q_prime}, N, DyadicLevel(Q, 0), pts,
        {
            "R": Prediction(2 * q_prime - 1, "derived"),
            "triple": Prediction((Q, 1, 1), "stated", "D, P, F equal to Q, 1 and 1"),
            "K": Prediction(1, "stated", "K ~ 1"),
        },
        fixed_denominator_rule(q_prime), "fixed_denominator",
    )
    return c.validate()


def build_prime_reciprocal(Q: int, N: int = 1 << 10, modified_d: Optional[int] = None) -> Construction:
    """
    Base: vertices (c/r, c/r), r prime in the block of sqrt(Q), 1 <= |c| <= r - 1;
    edges between different r.
    Modified: vertices (b/(dq), 1/(dq)), q prime in the block of sqrt(Q/d),
    gcd(b, dq) = 1, 1 <= b < dq; edges when gcd(q - q', d) = 1.
    """
    if not is_power_of_two(Q):
        raise ConstructionError("Q must be a power of two")
    if modified_d is None:
        X = _sqrt_block(Q)
        primes = primes_in_block(X)
        if len(primes) < 2:
            raise ConstructionError(f"fewer than two primes in [{X}, {2 * X})")
        pts = [TorusPoint(Fraction(c, r), Fraction(c, r))
               for r in primes for c in range(-r + 1, r) if c != 0]
        c = Construction(
            "prime_reciprocal", {"Q": Q}, N, DyadicLevel(Q, 0), pts,
            {
                "R": Prediction(sum(2 * (r - 1) for r in primes), "derived"),
                "primes": Prediction(tuple(primes), "derived"),
                "triple": Prediction((X, X, X), "stated", "D, P, F all equal to sqrt(Q)"),
                "K": Prediction(1, "stated", "K = 1"),
            },
            distinct_denominator_rule, "distinct_denominator",
        )
        return c.validate()

    d = modified_d
    _require_prime(d, "d")
    if d > Q:
        raise ConstructionError("need d <= Q")
    X = 1 << (max(1, math.isqrt(Q // d)).bit_length() - 1)
    primes = [p for p in primes_in_block(X) if p != d]
    if len(primes) < 2:
        raise ConstructionError(f"fewer than two primes in [{X}, {2 * X})")
    pts = [TorusPoint(Fraction(b, d * p), Fraction(1, d * p))
           for p in primes for b in range(1, d * p) if math.gcd(b, d * p) == 1]
    D_pred = dyadic_block(math.isqrt(Q * d))
    c = Construction(
        "prime_reciprocal_modified", {"Q": Q, "d": d}, N, DyadicLevel(Q, 0), pts,
        {
            "primes": Prediction(tuple(primes), "derived"),
            "triple": Prediction((D_pred, X, X), "stated", "D ~ sqrt(Qd), P = F ~ sqrt(Q/d); not tight"),
        },
        modified_reciprocal_rule(d), "modified_reciprocal",
    )
    return c.validate()


def build_bipartite(Q1: int, Q2: int, N: int = 1 << 12, c_mult: int = 1) -> Construction:
    """
    Sides of points (b/r, c/r), r prime in the block of Q_i, one point per
    (r, b) with c = c_mult * b mod r, kept on the sign of b (c_mult = 1 gives
    c = b). The larger side is cut round-robin over its primes to the size of
    the smaller. Every cross pair is an edge: c is a unit mod r, so t-differences
    have numerator prime to r1 r2.
    """
    if not (is_power_of_two(Q1) and is_power_of_two(Q2)) or Q1 == Q2:
        raise ConstructionError("need distinct powers of two Q1, Q2")

    def c_of(b: int, r: int) -> int:
        c = (b * c_mult) % r
        return c - r if b < 0 else c

    sides = []
    for Qi in (Q1, Q2):
        primes = primes_in_block(Qi)
        if not primes:
            raise ConstructionError(f"no primes in [{Qi}, {2 * Qi})")
        if any(c_mult % r == 0 for r in primes):
            raise ConstructionError(f"c_mult={c_mult} is not a unit modulo every prime in [{Qi}, {2 * Qi})")
        sides.append({r: [TorusPoint(Fraction(b, r), Fraction(c_of(b, r), r)) for b in range(-r + 1, r) if b]
                      for r in primes})
    size = min(sum(len(v) for v in s.values()) for s in sides)

    def round_robin(groups: Dict[int, List[TorusPoint]]) -> List[TorusPoint]:
        out: List[TorusPoint] = []
        queues = [list(groups[r]) for r in sorted(groups)]
        k = 0
        while len(out) < size:
            if queues[k % len(queues)]:
                out.append(queues[k % len(queues)].pop(0))
            k += 1
        return out

    V1, V2 = round_robin(sides[0]), round_robin(sides[1])
    side = {(p.x, p.t): 0 for p in V1}
    side.update({(p.x, p.t): 1 for p in V2})
    Q = Q1 * Q2
    c = Construction(
        "bipartite", {"Q1": Q1, "Q2": Q2, "c_mult": c_mult}, N, DyadicLevel(Q, 0), V1 + V2,
        {
            "edges": Prediction(len(V1) * len(V2), "stated", "every cross pair is an edge"),
            "triples": Prediction(((Q1, Q1, Q1), (Q2, Q2, Q2)), "stated", "P = D = Q1 and P = D = Q2"),
            "K": Prediction(Fraction((len(V1) + len(V2)) ** 2, 2 * len(V1) * len(V2)), "derived"),
        },
        bipartite_rule(side), "bipartite",
    )
    return c.validate()


# -------------------- square-root admissible pairs --------------------

@dataclass
class SqrtInstance:
    x: Fraction
    t: Fraction
    q1: int
    q2: int
    witness: Witness
    profile: GcdProfile


def build_sqrt_admissible(r1: int, r2: int, r3: int, c1: int, c2: int, d1: int, d2: int,
                          c3: int = 1, d3: int = 1) -> SqrtInstance:
    """
    t = c2/r2 - c1/r1, x = d2/r2 - d1/r1 split through r3:
      a1/(r1 r3) = c3/r3 - c1/r1,  a2/(r2 r3) = c2/r2 - c3/r3,
    and the same for b with d.
    """
    for name, r in (("r1", r1), ("r2", r2), ("r3", r3)):
        _require_prime(r, name)
    if len({r1, r2, r3}) != 3:
        raise ConstructionError("r1, r2, r3 must be distinct")
    if not (1 <= c1 <= r1 - 1 and 1 <= c2 <= r2 - 1):
        raise ConstructionError("need 1 <= c_i <= r_i - 1")
    if abs(d1) > r1 - 1 or abs(d2) > r2 - 1:
        raise ConstructionError("need |d_i| <= r_i - 1")
    if not (1 <= abs(c3) <= r3 - 1 and 1 <= abs(d3) <= r3 - 1):
        raise ConstructionError("need 1 <= |c3|, |d3| <= r3 - 1")
    q1, q2 = r1 * r3, r2 * r3
    a1, a2 = c3 * r1 - c1 * r3, c2 * r3 - c3 * r2
    b1, b2 = d3 * r1 - d1 * r3, d2 * r3 - d3 * r2
    l1, l2 = LabeledDiff(a1, b1, q1), LabeledDiff(a2, b2, q2)
    try:
        prof = gcd_profile(l1, l2)
    except LabelError as e:
        raise ConstructionError(f"split through r3={r3} leaves the label ranges: {e}") from e
    t = Fraction(c2, r2) - Fraction(c1, r1)
    x = Fraction(d2, r2) - Fraction(d1, r1)
    if l1.t + l2.t != t or l1.x + l2.x != x:
        raise ConstructionError("labels do not sum to (x, t)")
    return SqrtInstance(x, t, q1, q2, Witness(a1, a2, b1, b2, prof.f, prof.p), prof)


def sqrt_admissible_family(r1: int, r2: int, c1: int, c2: int, d1: int, d2: int, Q: int) -> List[SqrtInstance]:
    """One instance per prime r3 in the block of sqrt(Q) with r1 r3, r2 r3 in [Q, 2Q)."""
    out = []
    for r3 in primes_in_block(_sqrt_block(Q)):
        if r3 in (r1, r2):
            continue
        if not (Q <= r1 * r3 < 2 * Q and Q <= r2 * r3 < 2 * Q):
            continue
        out.append(build_sqrt_admissible(r1, r2, r3, c1, c2, d1, d2))
    return out


# -------------------- random baseline --------------------

def build_random_baseline(R: int, N: int, level: DyadicLevel, seed: int = 0) -> Construction:
    """Vertices (t_r, t_r) with t_r uniform in distinct cells [2k/N, (2k+1)/N)."""
    if R > MAX_BASELINE:
        raise ConstructionError(f"R must be <= {MAX_BASELINE}")
    if 2 * R > N:
        raise ConstructionError("need R <= N/2 for separated samples")
    rng = np.random.default_rng(seed)
    ks = np.sort(rng.choice(N // 2, size=R, replace=False))
    us = rng.integers(0, 1 << 20, size=R)
    pts = [TorusPoint(t, t) for t in (Fraction(2 * int(k), N) + Fraction(int(u), N << 20) for k, u in zip(ks, us))]
    density = Fraction(level.Q, N * level.two_l)
    c = Construction(
        "random_baseline", {"R": R, "seed": seed}, N, level, pts,
        {
            "density": Prediction(density, "stated", "edge density ~ Q/(N 2^l)"),
            "non_example": Prediction(float(density) < 2 ** (-level.l / 2), "stated", "density << 2^{-l/2}"),
        },
    )
    return c.validate()


def edge_density(edges: int, R: int) -> float:
    return 0.0 if R < 2 else edges / (R * (R - 1) / 2)


# -------------------- x-only hypothesis --------------------

@dataclass
class XOnlyReport:
    N: int
    level: DyadicLevel
    hits: int
    total: int
    pair_count: int
    full_bound: float

    @property
    def fraction(self) -> float:
        return self.hits / self.total


def build_x_only(N: int, Q: int, l: int) -> XOnlyReport:
    """
    The grid x_r = r/N against the x-projection of S_{Q,l}: the share of grid
    differences within 1/(Q 2^l) of some b/q, q in [Q, 2Q), and the resulting
    number of ordered pairs, against the N^2 2^{-l/2} a full-set argument allows.
    """
    level = DyadicLevel(Q, l).validate(N)
    radius = Fraction(1, Q * level.two_l)
    hits = 0
    for k in range(N):
        v = Fraction(k, N)
        if any(_near_fraction(v, q, radius) for q in level.q_values()):
            hits += 1
    return XOnlyReport(N, level, hits, N, hits * N, N * N / math.sqrt(level.two_l))


def _near_fraction(v: Fraction, q: int, radius: Fraction) -> bool:
    b = round(v * q)
    return abs(mod1_centered(v - Fraction(b, q))) <= radius


def x_only_oracle(N: int, Q: int, l: int) -> int:
    """Grid differences in the x-projection, by scanning every b/q."""
    level = DyadicLevel(Q, l)
    radius = Fraction(1, Q * level.two_l)
    hit = set()
    for q in level.q_values():
        for b in range(q):
            for k in range(N):
                v = Fraction(k, N)
                if abs(mod1_centered(v - Fraction(b, q))) <= radius:
                    hit.add(k)
    return len(hit)


# -------------------- registry --------------------

Params = Dict[str, object]


def _need(params: Params, *names: str) -> List[int]:
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ConstructionError(f"missing parameters: {', '.join(missing)}")
    return [int(params[n]) for n in names]


def _opt(params: Params, name: str, default: int) -> int:
    v = params.get(name)
    return default if v is None else int(v)


def _sharp_from(p: Params) -> Construction:
    N, q, l = _need(p, "N", "q", "l")
    if p.get("M") is None:
        raise ConstructionError("missing parameters: M")
    return build_sharp_c1(N, q, DyadicLevel(dyadic_block(q), l), float(p["M"]))


def _baseline_from(p: Params) -> Construction:
    R, N, Q, l = _need(p, "R", "N", "Q", "l")
    return build_random_baseline(R, N, DyadicLevel(Q, l), _opt(p, "seed", 0))


BUILDERS: Dict[str, Callable[[Params], object]] = {
    "sharp_c1": _sharp_from,
    "enemies": lambda p: build_enemies(*_need(p, "N", "Q", "q", "r", "a"), b=_opt(p, "b", 1)),
    "fixed_denominator": lambda p: build_fixed_denominator(*_need(p, "q"), N=_opt(p, "N", 1 << 10)),
    "prime_reciprocal": lambda p: build_prime_reciprocal(*_need(p, "Q"), N=_opt(p, "N", 1 << 10)),
    "prime_reciprocal_modified": lambda p: build_prime_reciprocal(
        *_need(p, "Q"), N=_opt(p, "N", 1 << 10), modified_d=_need(p, "d")[0]),
    "bipartite": lambda p: build_bipartite(*_need(p, "Q1", "Q2"), N=_opt(p, "N", 1 << 12),
                                           c_mult=_opt(p, "c_mult", 1)),
    "sqrt_admissible": lambda p: build_sqrt_admissible(
        *_need(p, "r1", "r2", "r3", "c1", "c2", "d1", "d2"), c3=_opt(p, "c3", 1), d3=_opt(p, "d3", 1)),
    "random_baseline": _baseline_from,
    "x_only": lambda p: build_x_only(*_need(p, "N", "Q", "l")),
}


def get_builder(kind: str) -> Callable[[Params], object]:
    try:
        return BUILDERS[kind]
    except KeyError:
        raise ConstructionError(f"unknown construction kind: {kind}") from None


def build_from_params(kind: str, params: Params) -> object:
    """Build by kind from a flat parameter dict (CLI flags or JSON)."""
    return get_builder(kind)(params)


def result_to_json(obj: object) -> Dict[str, object]:
    if isinstance(obj, Construction):
        return obj.as_json()
    if isinstance(obj, EnemyFamily):
        Q = obj.Q
        return {
            "kind": "enemies",
            "x": format_fraction(obj.x),
            "t": format_fraction(obj.t),
            "N": obj.N,
            "Q": Q,
            "size": obj.size,
            "separated": obj.separated_count(),
            "min_gap": format_fraction(obj.min_gap) if obj.min_gap is not None else None,
            "members": [[m.q1, m.a1, m.b1, m.a2, m.b2] for m in obj.members],
        }
    if isinstance(obj, SqrtInstance):
        pr = obj.profile
        return {
            "kind": "sqrt_admissible",
            "x": format_fraction(obj.x),
            "t": format_fraction(obj.t),
            "q1": obj.q1,
            "q2": obj.q2,
            "witness": [obj.witness.a1, obj.witness.a2, obj.witness.b1, obj.witness.b2],
            "profile": {"d": pr.d, "p": pr.p, "f": pr.f},
        }
    if isinstance(obj, XOnlyReport):
        return {
            "kind": "x_only",
            "N": obj.N,
            "Q": obj.level.Q,
            "l": obj.level.l,
            "hits": obj.hits,
            "fraction": obj.fraction,
            "pair_count": obj.pair_count,
            "full_bound": obj.full_bound,
        }
    raise ConstructionError(f"no JSON form for {type(obj).__name__}")


def rule_from_json(name: Optional[str], params: Params, points: List[TorusPoint]) -> Optional[EdgeRule]:
    """Rebuild a construction's edge rule from its name and parameters."""
    if name is None:
        return None
    if name == "fixed_denominator":
        return fixed_denominator_rule(_need(params, "q")[0])
    if name == "distinct_denominator":
        return distinct_denominator_rule
    if name == "modified_reciprocal":
        return modified_reciprocal_rule(_need(params, "d")[0])
    if name == "bipartite":
        Q1 = _need(params, "Q1")[0]
        return bipartite_rule({(p.x, p.t): 0 if dyadic_block(p.x.denominator) == Q1 else 1 for p in points})
    raise ConstructionError(f"unknown edge rule: {name}")


def construction_from_json(data: Dict[str, object]) -> Construction:
    """Points, level and edge rule of a construction written by `as_json`."""
    try:
        points = [TorusPoint(Fraction(x), Fraction(t)) for x, t in data["points"]]
        params = dict(data.get("params", {}))
        N, Q, l = int(data["N"]), int(data["Q"]), int(data["l"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConstructionError(f"not a construction document: {e}") from None
    rule_name = data.get("rule")
    return Construction(
        str(data.get("kind", "")), params, N, DyadicLevel(Q, l), points, {},
        rule_from_json(rule_name, params, points), rule_name,
    )


__all__ = [
    "KINDS",
    "Prediction",
    "Construction",
    "build_sharp_c1",
    "EnemyMember",
    "EnemyFamily",
    "build_enemies",
    "enemies_size_floor",
    "build_fixed_denominator",
    "build_prime_reciprocal",
    "build_bipartite",
    "SqrtInstance",
    "build_sqrt_admissible",
    "sqrt_admissible_family",
    "build_random_baseline",
    "edge_density",
    "XOnlyReport",
    "build_x_only",
    "x_only_oracle",
    "BUILDERS",
    "get_builder",
    "build_from_params",
    "result_to_json",
    "rule_from_json",
    "construction_from_json",
]
