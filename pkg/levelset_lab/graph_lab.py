# levelset_lab/graph_lab.py
"""
Configuration graphs on separated torus points.

Vertices are exact rational points with pairwise 1/N-separated x. Two vertices
are joined when their difference, reduced to [-1/2, 1/2)^2, lies in an arc cell
of the level (or when a construction's edge rule says so). Every edge stores
the signed label (a, b, q) of v_i - v_j for i < j; the reverse direction is the
negated label.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from levelset_lab.arcs import ArcCell, DyadicLevel, TorusPoint, arc_membership
from levelset_lab.arith import (
    GcdProfile,
    LabeledDiff,
    dyadic_block,
    format_fraction,
    as_fraction,
    log_budget,
    gcd_profile,
    mod1_centered,
)
from levelset_lab.errors import (
    ConstructionError,
    EmptyStructure,
    GuardExceeded,
    InputError,
    LabelError,
    SeparationError,
)
from levelset_lab.sweep import chunked, parallel_map

log = logging.getLogger(__name__)

MAX_VERTICES = 1 << 14
_ROW_CHUNK = 128
_FLOAT_SLACK = 1e-9

EdgeRule = Callable[[TorusPoint, TorusPoint], bool]
Triple = Tuple[int, int, int]


# -------------------- graph --------------------

@dataclass
class ConfigGraph:
    vertices: List[TorusPoint]
    N: int
    level: DyadicLevel
    graph: nx.Graph
    dyadic: bool = False
    epsilon_c: Fraction = Fraction(1)
    rule: Optional[str] = None

    @property
    def R(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    @property
    def K_emp(self) -> float:
        """R^2 / (2E); infinite for an edgeless graph."""
        if self.edge_count == 0:
            return math.inf
        return self.R * self.R / (2.0 * self.edge_count)

    def witness(self, u: int, v: int) -> LabeledDiff:
        """Label of vertices[u] - vertices[v]."""
        lab = self.graph.edges[u, v]["label"]
        return lab if u < v else lab.negate()

    def neighbors(self, v: int) -> Set[int]:
        return set(self.graph.neighbors(v))

    def common_neighbors(self, u: int, v: int) -> List[int]:
        return sorted(nx.common_neighbors(self.graph, u, v))

    def adjacency(self) -> np.ndarray:
        return nx.to_numpy_array(self.graph, nodelist=range(self.R), dtype=np.int64)

    def difference(self, u: int, v: int) -> TorusPoint:
        z = self.vertices[u] - self.vertices[v]
        return TorusPoint(mod1_centered(z.x), mod1_centered(z.t))


def check_separation(points: Sequence[TorusPoint], N: int) -> None:
    xs = sorted(p.x for p in points)
    gap = Fraction(1, N)
    for lo, hi in zip(xs, xs[1:]):
        if hi - lo < gap:
            raise SeparationError(f"x-coordinates {format_fraction(lo)} and {format_fraction(hi)} closer than 1/{N}")


def label_from_cell(cell: ArcCell, z: TorusPoint) -> LabeledDiff:
    """Signed (a, b, q) whose fractions sit next to the centered difference z."""
    q = cell.q

    def signed(r: int, v: Fraction) -> int:
        k = math.floor(Fraction(r, q) - v + Fraction(1, 2))
        s = r - k * q
        # v = -1/2 sits halfway between 0 and -q; keep |s| <= q-1
        return r if abs(s) > q - 1 else s

    return LabeledDiff(signed(cell.a, z.t), signed(cell.b, z.x), q).validate()


def label_from_difference(z: TorusPoint) -> LabeledDiff:
    """Exact label of a centered difference: q is the common denominator."""
    q = z.t.denominator * z.x.denominator // math.gcd(z.t.denominator, z.x.denominator)
    return LabeledDiff(int(z.t * q), int(z.x * q), q).validate()


def _prefilter(ts: np.ndarray, xs: np.ndarray, lo: int, hi: int, level: DyadicLevel,
               N: int, epsilon_c: Fraction) -> List[Tuple[int, int]]:
    """Float screen for pairs (i, j), lo <= i < hi, i < j, that may share an arc cell."""
    R = ts.size
    out: List[Tuple[int, int]] = []
    eps = float(epsilon_c)
    for i in range(lo, hi):
        dt = ts[i] - ts[i + 1:]
        dx = xs[i] - xs[i + 1:]
        hit = np.zeros(R - i - 1, dtype=bool)
        for q in level.q_values():
            rt = 1.0 / (level.two_l * q * N)
            rx = eps / (level.two_l * q)
            ft = dt * q
            fx = dx * q
            near_t = np.abs(ft - np.rint(ft)) <= q * rt * (1 + _FLOAT_SLACK) + _FLOAT_SLACK
            near_x = np.abs(fx - np.rint(fx)) <= q * rx * (1 + _FLOAT_SLACK) + _FLOAT_SLACK
            hit |= near_t & near_x
        out.extend((i, i + 1 + int(k)) for k in np.nonzero(hit)[0])
    return out


def build_graph(points: Sequence[TorusPoint], N: int, level: DyadicLevel, *,
                dyadic: bool = False, epsilon_c=Fraction(1),
                edge_rule: Optional[EdgeRule] = None, rule_name: Optional[str] = None,
                workers: int = 1) -> ConfigGraph:
    """
    Join every pair whose difference lies in an arc cell at `level`; with
    edge_rule, join exactly the pairs the rule accepts.
    """
    pts = [TorusPoint(as_fraction(p.x), as_fraction(p.t)) for p in points]
    if len(pts) > MAX_VERTICES:
        raise GuardExceeded(f"{len(pts)} vertices exceeds {MAX_VERTICES}")
    check_separation(pts, N)
    epsilon_c = Fraction(epsilon_c)
    G = nx.Graph()
    G.add_nodes_from(range(len(pts)))
    g = ConfigGraph(pts, N, level, G, dyadic, epsilon_c, rule_name)

    if edge_rule is not None:
        for i, j in combinations(range(len(pts)), 2):
            if not edge_rule(pts[i], pts[j]):
                continue
            try:
                lab = label_from_difference(g.difference(i, j))
            except LabelError as e:
                raise ConstructionError(f"edge ({i}, {j}) has no valid label: {e}") from e
            G.add_edge(i, j, label=lab)
        return g

    ts = np.array([float(p.t) for p in pts])
    xs = np.array([float(p.x) for p in pts])

    def scan(span: Tuple[int, int]) -> List[Tuple[int, int, LabeledDiff]]:
        found = []
        for i, j in _prefilter(ts, xs, span[0], span[1], level, N, epsilon_c):
            z = g.difference(i, j)
            cell = arc_membership(z, level, N, dyadic=dyadic, epsilon_c=epsilon_c)
            if cell is not None:
                found.append((i, j, label_from_cell(cell, z)))
        return found

    for chunk in parallel_map(scan, chunked(len(pts), _ROW_CHUNK), workers):
        for i, j, lab in chunk:
            G.add_edge(i, j, label=lab)
    log.debug("graph R=%d E=%d at Q=%d 2^l=%d", g.R, g.edge_count, level.Q, level.two_l)
    return g


# -------------------- popular pairs --------------------

def _nx(g: Union[ConfigGraph, nx.Graph]) -> nx.Graph:
    return g.graph if isinstance(g, ConfigGraph) else g


@dataclass
class PopularPairs:
    pairs: List[Tuple[int, int]]
    sum_common: int
    threshold: float
    R: int
    edges: int
    K: float
    lemma_applies: bool
    lemma_bound: float
    slack: float

    @property
    def lemma_ok(self) -> bool:
        return not self.lemma_applies or self.sum_common >= self.slack * self.lemma_bound


def popular_pairs(g: Union[ConfigGraph, nx.Graph], K: float, slack: float = 1.0) -> PopularPairs:
    """
    Unordered pairs with at least R/(4K^2) common neighbours. The lower bound
    R^3/(16K^2) on their total is checked when E >= R^2/(2K) and K <= sqrt(R)/4.
    """
    if not K > 0:
        raise InputError("K must be positive")
    G = _nx(g)
    nodes = sorted(G.nodes)
    R = len(nodes)
    E = G.number_of_edges()
    threshold = R / (4.0 * K * K)
    A = nx.to_numpy_array(G, nodelist=nodes, dtype=np.int64)
    C = A @ A
    iu, ju = np.triu_indices(R, k=1)
    common = C[iu, ju]
    keep = common >= threshold
    pairs = [(nodes[i], nodes[j]) for i, j in zip(iu[keep].tolist(), ju[keep].tolist())]
    applies = E >= R * R / (2.0 * K) and K <= math.sqrt(R) / 4.0
    return PopularPairs(
        pairs=pairs,
        sum_common=int(common[keep].sum()),
        threshold=threshold,
        R=R,
        edges=E,
        K=K,
        lemma_applies=applies,
        lemma_bound=R ** 3 / (16.0 * K * K),
        slack=slack,
    )


# -------------------- (D, P, F) partition --------------------

def profile_key(profile: GcdProfile) -> Triple:
    return (dyadic_block(profile.d), dyadic_block(profile.p), dyadic_block(profile.f))


@dataclass
class TriplePartition:
    v1: int
    v2: int
    bins: Dict[Triple, List[int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(len(vs) for vs in self.bins.values())

    def argmax(self) -> Optional[Triple]:
        """Largest class; the smallest key on ties."""
        if not self.bins:
            return None
        return min(self.bins, key=lambda k: (-len(self.bins[k]), k))

    def sizes(self) -> Dict[Triple, int]:
        return {k: len(v) for k, v in sorted(self.bins.items())}


def fork_profile(g: ConfigGraph, v1: int, v3: int, v2: int) -> GcdProfile:
    """Profile of the labels of v1 - v3 and v3 - v2."""
    return gcd_profile(g.witness(v1, v3), g.witness(v3, v2))


def dpf_partition(g: ConfigGraph, v1: int, v2: int) -> TriplePartition:
    if v1 == v2:
        raise InputError("dpf_partition needs distinct vertices")
    bins: Dict[Triple, List[int]] = defaultdict(list)
    for v3 in g.common_neighbors(v1, v2):
        bins[profile_key(fork_profile(g, v1, v3, v2))].append(v3)
    return TriplePartition(v1, v2, dict(sorted(bins.items())))


@dataclass
class DominantTriple:
    D: int
    P: int
    F: int
    pairs: List[Tuple[int, int]]
    mass: int
    bound: float  # R^3/K^2
    floor: float  # R^3/(16 K^2 (log2 N)^log_power)
    masses: Dict[Triple, int] = field(default_factory=dict)

    @property
    def key(self) -> Triple:
        return (self.D, self.P, self.F)

    @property
    def ratio(self) -> float:
        return self.mass / self.bound if self.bound else math.inf

    @property
    def floor_ok(self) -> bool:
        return self.mass >= self.floor


def dominant_triple(g: ConfigGraph, K: float, log_power: int = 3) -> DominantTriple:
    """
    Each popular pair votes for its largest (D, P, F) class; the triple with the
    largest total class size wins, ties to the smallest triple. Its mass is held
    against R^3/K^2 less the popular-pair constant and a (log2 N)^log_power loss.
    """
    pop = popular_pairs(g, K)
    if not pop.pairs:
        raise EmptyStructure("no popular pairs")
    masses: Dict[Triple, int] = defaultdict(int)
    members: Dict[Triple, List[Tuple[int, int]]] = defaultdict(list)
    for v1, v2 in pop.pairs:
        part = dpf_partition(g, v1, v2)
        key = part.argmax()
        if key is None:
            continue
        masses[key] += len(part.bins[key])
        members[key].append((v1, v2))
    if not masses:
        raise EmptyStructure("popular pairs carry no labelled common neighbours")
    best = min(masses, key=lambda k: (-masses[k], k))
    return DominantTriple(
        D=best[0], P=best[1], F=best[2],
        pairs=members[best],
        mass=masses[best],
        bound=g.R ** 3 / (K * K),
        floor=g.R ** 3 / (16.0 * K * K * log_budget(g.N, log_power)),
        masses=dict(sorted(masses.items())),
    )


# -------------------- forks --------------------

@dataclass
class ForkChain:
    handle: Tuple[int, int]
    handle_label: LabeledDiff
    triple: Triple
    S: List[int]
    S_prime: List[int]
    S_dprime: List[int]
    S_tprime: List[int]
    fixed_d: int
    fixed_p: int
    fixed_f: int
    tines: Dict[int, LabeledDiff] = field(default_factory=dict)  # v2 -> label of v3 - v2

    def floors(self, Q: int) -> Dict[str, bool]:
        c = math.log2(Q) + 1
        return {
            "S_prime": len(self.S_prime) * c * c >= len(self.S),
            "S_dprime": len(self.S_dprime) * c >= len(self.S_prime),
            "S_tprime": len(self.S_tprime) * c >= len(self.S_dprime),
        }

    def monotone(self) -> bool:
        return (set(self.S) >= set(self.S_prime) >= set(self.S_dprime) >= set(self.S_tprime)
                and len(self.S) >= len(self.S_prime) >= len(self.S_dprime) >= len(self.S_tprime))


def _largest_class(groups: Dict[int, List[int]]) -> int:
    return min(groups, key=lambda k: (-len(groups[k]), k))


def extract_fork(g: ConfigGraph, D: int, P: int, F: int, K: Optional[float] = None) -> ForkChain:
    """
    Handle (v1, v3) maximizing S = {v2 : v3 in N_{D,P,F}(v1, v2)}; then S' fixes
    d = gcd(q1, q2), S'' fixes p, S''' fixes f, each the largest class.
    """
    triple = (D, P, F)
    best: Optional[Tuple[int, Tuple[int, int], List[int]]] = None
    for u, w in sorted(g.graph.edges):
        for v1, v3 in ((u, w), (w, u)):
            S = [v2 for v2 in sorted(g.neighbors(v3))
                 if v2 != v1 and profile_key(fork_profile(g, v1, v3, v2)) == triple]
            if S and (best is None or len(S) > best[0]):
                best = (len(S), (v1, v3), S)
    if best is None:
        raise EmptyStructure(f"no fork carries the triple {triple}")
    _, (v1, v3), S = best
    if K is not None and len(S) < g.R / K:
        log.info("fork size %d below R/K = %.2f", len(S), g.R / K)

    handle_label = g.witness(v1, v3)
    profiles = {v2: fork_profile(g, v1, v3, v2) for v2 in S}
    by_d: Dict[int, List[int]] = defaultdict(list)
    for v2 in S:
        by_d[profiles[v2].d].append(v2)
    d = _largest_class(by_d)
    by_p: Dict[int, List[int]] = defaultdict(list)
    for v2 in by_d[d]:
        by_p[profiles[v2].p].append(v2)
    p = _largest_class(by_p)
    by_f: Dict[int, List[int]] = defaultdict(list)
    for v2 in by_p[p]:
        by_f[profiles[v2].f].append(v2)
    f = _largest_class(by_f)
    return ForkChain(
        handle=(v1, v3),
        handle_label=handle_label,
        triple=triple,
        S=S,
        S_prime=by_d[d],
        S_dprime=by_p[p],
        S_tprime=by_f[f],
        fixed_d=d,
        fixed_p=p,
        fixed_f=f,
        tines={v2: g.witness(v3, v2) for v2 in S},
    )


@dataclass
class StructureReport:
    pairs_checked: int
    violations: List[Tuple[int, int, str]]

    @property
    def ok(self) -> bool:
        return not self.violations


def fork_structure_check(fork: ForkChain) -> StructureReport:
    """
    For v2, v2' in S'', a2/q2 - a2'/q2' must reduce to a denominator dividing
    (d/p) m2 m2'.
    """
    d, p = fork.fixed_d, fork.fixed_p
    violations = []
    checked = 0
    for u, w in combinations(fork.S_dprime, 2):
        l1, l2 = fork.tines[u], fork.tines[w]
        diff = l1.t - l2.t
        bound = (d // p) * (l1.q // d) * (l2.q // d)
        checked += 1
        if bound % diff.denominator:
            violations.append((u, w, f"{format_fraction(diff)} does not divide into {bound}"))
    return StructureReport(checked, violations)


def fork_dyadic_neighbor_count(fork: ForkChain, g: ConfigGraph, level1: DyadicLevel,
                               log_power: int = 3) -> Tuple[int, float]:
    """Largest number of v2' in S'' with v2 - v2' in the dyadic set at level1."""
    level1.validate(g.N)
    best = 0
    for v2 in fork.S_dprime:
        n = sum(
            1 for w in fork.S_dprime
            if w != v2 and arc_membership(g.difference(v2, w), level1, g.N, dyadic=True) is not None
        )
        best = max(best, n)
    bound = g.N / level1.two_l * math.log2(g.N) ** log_power
    return best, best / bound


@dataclass
class FCountReport:
    size: int
    bound: float
    residue_classes: int

    @property
    def ratio(self) -> float:
        return self.size / self.bound if self.bound else math.inf


def fork_f_count_report(fork: ForkChain, g: ConfigGraph) -> FCountReport:
    """|S'''| against (N/(Q 2^l)) (Q/D) (Q/F), with the (q2, b2 mod f) classes seen."""
    Q, tl = g.level.Q, g.level.two_l
    D, _, F = fork.triple
    classes = {(fork.tines[v].q, fork.tines[v].b % fork.fixed_f) for v in fork.S_tprime}
    bound = (g.N / (Q * tl)) * (Q / D) * (Q / F)
    return FCountReport(len(fork.S_tprime), bound, len(classes))


# -------------------- export --------------------

def graph_to_json(g: ConfigGraph) -> Dict[str, object]:
    edges = []
    for u, v in sorted(tuple(sorted(e)) for e in g.graph.edges):
        lab = g.witness(u, v)
        edges.append([u, v, lab.a, lab.b, lab.q])
    return {
        "N": g.N,
        "Q": g.level.Q,
        "l": g.level.l,
        "dyadic": g.dyadic,
        "epsilon_c": format_fraction(g.epsilon_c),
        "rule": g.rule,
        "vertices": [list(p.as_strings()) for p in g.vertices],
        "edges": edges,
    }


def graph_from_json(data: Dict[str, object]) -> ConfigGraph:
    pts = [TorusPoint(as_fraction(x), as_fraction(t)) for x, t in data["vertices"]]
    N = int(data["N"])
    check_separation(pts, N)
    G = nx.Graph()
    G.add_nodes_from(range(len(pts)))
    for u, v, a, b, q in data["edges"]:
        G.add_edge(int(u), int(v), label=LabeledDiff(int(a), int(b), int(q)).validate())
    return ConfigGraph(
        pts, N, DyadicLevel(int(data["Q"]), int(data["l"])), G,
        bool(data.get("dyadic", False)), as_fraction(data.get("epsilon_c", "1")), data.get("rule"),
    )


__all__ = [
    "MAX_VERTICES",
    "ConfigGraph",
    "check_separation",
    "label_from_cell",
    "label_from_difference",
    "build_graph",
    "PopularPairs",
    "popular_pairs",
    "profile_key",
    "TriplePartition",
    "fork_profile",
    "dpf_partition",
    "DominantTriple",
    "dominant_triple",
    "ForkChain",
    "extract_fork",
    "StructureReport",
    "fork_structure_check",
    "fork_dyadic_neighbor_count",
    "FCountReport",
    "fork_f_count_report",
    "graph_to_json",
    "graph_from_json",
]
