# levelset_lab/census.py
"""
Box census of fraction sums.

[0,1)^2 is cut into boxes of side 1/(2^l Q) in x and 1/(N 2^l Q) in t,
anchored at 0. Each tuple (q1, q2, a1, a2, b1, b2) with q_i in [Q, 2Q),
|a_i| < q_i units, |b_i| < q_i lands in the box of
((b1/q1 + b2/q2) mod 1, (a1/q1 + a2/q2) mod 1). Box indices are computed with
integer floor division, so binning is exact.

Counters:
  N       tuples per box
  N_star  tuples with gcd(q1, q2) = 1
  n       distinct (q1, b1) per box
  n_star  distinct (q1, b1) reachable through a coprime q2
  n_tilde largest 1/N-separated subset of the values b1/q1 in the box
"""
from __future__ import annotations

import bisect
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from levelset_lab.arcs import DyadicLevel
from levelset_lab.arith import check_int64, format_fraction, mod1, units_mod
from levelset_lab.counting import max_separated
from levelset_lab.errors import GuardExceeded, InputError
from levelset_lab.sweep import parallel_map

log = logging.getLogger(__name__)

VARIANTS = ("N", "N_star", "n", "n_star", "n_tilde")
TUPLE_Q_CAP = 32
KEY_Q_CAP = 64
ORACLE_Q_CAP = 16
TILDE_WORK_CAP = 1 << 30  # (distinct keys) x (nonzero boxes) membership checks
_SIGMA_CHUNK = 256

BOX_CSV_COLUMNS = ["x_lo", "t_lo", "ix", "it"] + list(VARIANTS)


@dataclass
class CensusSummary:
    Q: int
    two_l: int
    N: int
    box_count: int
    total_N: int
    total_N_star: int
    total_n: int
    total_n_star: int
    max_n: int
    nonzero_boxes: int

    @property
    def mean_n(self) -> float:
        return self.total_n / self.box_count

    @property
    def total_N_over_Q6(self) -> float:
        return self.total_N / float(self.Q) ** 6

    @property
    def total_n_over_Q6(self) -> float:
        return self.total_n / float(self.Q) ** 6

    def as_dict(self) -> Dict[str, object]:
        return {
            "Q": self.Q,
            "two_l": self.two_l,
            "N": self.N,
            "box_count": self.box_count,
            "total_N": self.total_N,
            "total_N_star": self.total_N_star,
            "total_n": self.total_n,
            "total_n_star": self.total_n_star,
            "max_n": self.max_n,
            "nonzero_boxes": self.nonzero_boxes,
            "mean_n": self.mean_n,
            "mean_n_over_Q": self.mean_n / self.Q,
            "total_N_over_Q6": self.total_N_over_Q6,
            "total_n_over_Q6": self.total_n_over_Q6,
        }


@dataclass
class BoxGrid:
    """Counters over the t-columns that received at least one tuple."""
    level: DyadicLevel
    N: int
    variants: Tuple[str, ...]
    columns: np.ndarray  # sorted t-box indices
    counters: Dict[str, np.ndarray] = field(default_factory=dict)  # (Kx, len(columns))

    @property
    def Kx(self) -> int:
        return self.level.two_l * self.level.Q

    @property
    def Kt(self) -> int:
        return self.N * self.level.two_l * self.level.Q

    @property
    def box_count(self) -> int:
        return self.Kx * self.Kt

    def box(self, ix: int, it: int) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        return (Fraction(ix, self.Kx), Fraction(ix + 1, self.Kx)), (Fraction(it, self.Kt), Fraction(it + 1, self.Kt))

    def _column(self, it: int) -> Optional[int]:
        j = int(np.searchsorted(self.columns, it))
        if j < self.columns.size and self.columns[j] == it:
            return j
        return None

    def counts_at(self, ix: int, it: int) -> Dict[str, int]:
        j = self._column(it)
        out = {}
        for name, arr in self.counters.items():
            out[name] = 0 if j is None else int(arr[ix, j])
        return out

    def _reference(self) -> np.ndarray:
        for name in ("N", "n", "N_star", "n_star"):
            if name in self.counters:
                return self.counters[name]
        raise InputError("no counters computed")

    def nonzero(self) -> List[Tuple[int, int]]:
        ref = self._reference()
        xs, js = np.nonzero(ref)
        return sorted(zip(xs.tolist(), self.columns[js].tolist()))

    def summary(self) -> CensusSummary:
        def total(name: str) -> int:
            arr = self.counters.get(name)
            return 0 if arr is None else int(arr.sum())

        n = self.counters.get("n")
        return CensusSummary(
            Q=self.level.Q,
            two_l=self.level.two_l,
            N=self.N,
            box_count=self.box_count,
            total_N=total("N"),
            total_N_star=total("N_star"),
            total_n=total("n"),
            total_n_star=total("n_star"),
            max_n=0 if n is None or n.size == 0 else int(n.max()),
            nonzero_boxes=int(np.count_nonzero(self._reference())),
        )

    def rows(self, limit: Optional[int] = None) -> List[Dict[str, object]]:
        out = []
        for ix, it in self.nonzero():
            counts = self.counts_at(ix, it)
            row: Dict[str, object] = {
                "x_lo": format_fraction(Fraction(ix, self.Kx)),
                "t_lo": format_fraction(Fraction(it, self.Kt)),
                "ix": ix,
                "it": it,
            }
            for name in VARIANTS:
                row[name] = counts.get(name, "")
            out.append(row)
            if limit is not None and len(out) >= limit:
                break
        return out


# -------------------- exact tuple counts --------------------

def a_labels(q: int) -> List[int]:
    return units_mod(q)


def b_labels(q: int) -> List[int]:
    return list(range(-q + 1, q))


def tuple_count(level: DyadicLevel, coprime: bool = False) -> int:
    """Number of tuples entering the census."""
    qs = list(level.q_values())
    weight = {q: len(a_labels(q)) * len(b_labels(q)) for q in qs}
    if not coprime:
        return sum(weight.values()) ** 2
    return sum(weight[q1] * weight[q2] for q1 in qs for q2 in qs if math.gcd(q1, q2) == 1)


# -------------------- indices --------------------

def _sum_indices(labels1: np.ndarray, q1: int, labels2: np.ndarray, q2: int, K: int) -> np.ndarray:
    """floor(K * ((u1/q1 + u2/q2) mod 1)) for all label pairs, flattened row-major in u1."""
    den = q1 * q2
    num = labels1[:, None] * q2 + labels2[None, :] * q1
    return (np.mod(num, den) * K) // den


@dataclass
class _PairData:
    q1: int
    q2: int
    ix: np.ndarray  # (len(b1), len(b2))
    it: np.ndarray  # flat


def _pair_data(q1: int, q2: int, Kx: int, Kt: int) -> _PairData:
    b1 = np.array(b_labels(q1), dtype=np.int64)
    b2 = np.array(b_labels(q2), dtype=np.int64)
    a1 = np.array(a_labels(q1), dtype=np.int64)
    a2 = np.array(a_labels(q2), dtype=np.int64)
    return _PairData(
        q1, q2,
        _sum_indices(b1, q1, b2, q2, Kx),
        _sum_indices(a1, q1, a2, q2, Kt).ravel(),
    )


# -------------------- census --------------------

def _check_guards(level: DyadicLevel, N: int, variants: Set[str]) -> None:
    unknown = variants - set(VARIANTS)
    if unknown:
        raise InputError(f"unknown census variants: {sorted(unknown)}")
    if not variants:
        raise InputError("no census variants requested")
    Q = level.Q
    if {"N", "N_star"} & variants and Q > TUPLE_Q_CAP:
        raise GuardExceeded(f"tuple census needs Q <= {TUPLE_Q_CAP}, got {Q}")
    if Q > KEY_Q_CAP:
        raise GuardExceeded(f"key census needs Q <= {KEY_Q_CAP}, got {Q}")
    check_int64(N * level.two_l * Q * 4 * Q * Q)


def _tuple_counts(pairs: List[_PairData], col_of, shape, coprime: bool) -> np.ndarray:
    out = np.zeros(shape, dtype=np.int64)
    for pd in pairs:
        if coprime and math.gcd(pd.q1, pd.q2) != 1:
            continue
        xs, hx = np.unique(pd.ix, return_counts=True)
        ts, ht = np.unique(pd.it, return_counts=True)
        out[np.ix_(xs, col_of(ts))] += np.outer(hx, ht)
    return out


def _key_counts(q1: int, rows: List[_PairData], Q: int, col_of, shape,
                coprime: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Distinct (q1, b1) per box for a fixed q1.

    (q1, b1) reaches box (ix, it) iff some q2 sends b1 to ix and some (a1, a2)
    of that same q2 to it. Bit j of sig_x[b1, ix] / sig_t[col] records q2 = Q + j.
    """
    Kx, n_cols = shape
    sig_x = np.zeros((2 * q1 - 1, Kx), dtype=np.uint64)
    sig_t = np.zeros(n_cols, dtype=np.uint64)
    for pd in rows:
        if coprime and math.gcd(q1, pd.q2) != 1:
            continue
        bit = np.uint64(1) << np.uint64(pd.q2 - Q)
        for i in range(pd.ix.shape[0]):
            sig_x[i, np.unique(pd.ix[i])] |= bit
        sig_t[col_of(np.unique(pd.it))] |= bit
    counts = np.zeros(shape, dtype=np.int64)
    hit = np.nonzero(sig_t)[0]
    if hit.size:
        sigmas, inv = np.unique(sig_t[hit], return_inverse=True)
        table = np.empty((Kx, sigmas.size), dtype=np.int64)
        for lo in range(0, sigmas.size, _SIGMA_CHUNK):
            chunk = sigmas[lo:lo + _SIGMA_CHUNK]
            table[:, lo:lo + chunk.size] = ((sig_x[:, :, None] & chunk[None, None, :]) != 0).sum(axis=0)
        counts[:, hit] += table[:, inv]
    return counts, sig_x, sig_t


def _tilde_counts(sigs: Dict[int, Tuple[np.ndarray, np.ndarray]], xs: np.ndarray, js: np.ndarray,
                  N: int, cap: int) -> np.ndarray:
    """
    ñ for the boxes (xs[k], columns[js[k]]) at once: one pass over the sorted
    distinct values b1/q1, taking a value in a box iff it is present there and
    lies >= 1/N above the box's last taken value (the greedy of max_separated).
    """
    by_value: Dict[Fraction, List[Tuple[int, int]]] = defaultdict(list)
    for q1, (sig_x, _) in sigs.items():
        for i in range(sig_x.shape[0]):
            by_value[Fraction(i - q1 + 1, q1)].append((q1, i))
    work = sum(len(keys) for keys in by_value.values()) * xs.size
    if work > cap:
        raise GuardExceeded(f"n_tilde needs {work} box checks, cap is {cap}")
    values = sorted(by_value)
    t_sel = {q1: sig_t[js] for q1, (_, sig_t) in sigs.items()}
    gap = Fraction(1, N)
    count = np.zeros(xs.size, dtype=np.int64)
    last = np.full(xs.size, -1, dtype=np.int64)
    for k, v in enumerate(values):
        member = np.zeros(xs.size, dtype=bool)
        for q1, i in by_value[v]:
            member |= (sigs[q1][0][i, xs] & t_sel[q1]) != 0
        prev = bisect.bisect_right(values, v - gap) - 1
        take = member & (last <= prev)
        count += take
        last[take] = k
    return count


def box_census(N: int, level: DyadicLevel, variants: Iterable[str] = VARIANTS, *,
               workers: int = 1, tilde_cap: int = TILDE_WORK_CAP) -> BoxGrid:
    """
    Census of all fraction-sum tuples at level (Q, l).

    n_tilde is evaluated on every nonzero box; GuardExceeded when that needs
    more than tilde_cap membership checks.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    wanted = set(variants)
    _check_guards(level, N, wanted)
    if "n_tilde" in wanted:
        wanted.add("n")
    Q = level.Q
    Kx = level.two_l * Q
    Kt = N * level.two_l * Q
    qs = list(level.q_values())

    pairs = parallel_map(lambda q1: [_pair_data(q1, q2, Kx, Kt) for q2 in qs], qs, workers)
    columns = np.unique(np.concatenate([pd.it for row in pairs for pd in row]))

    def col_of(ts: np.ndarray) -> np.ndarray:
        return np.searchsorted(columns, ts)

    shape = (Kx, columns.size)
    grid = BoxGrid(level, N, tuple(v for v in VARIANTS if v in wanted), columns)
    flat = [pd for row in pairs for pd in row]
    if "N" in wanted:
        grid.counters["N"] = _tuple_counts(flat, col_of, shape, coprime=False)
    if "N_star" in wanted:
        grid.counters["N_star"] = _tuple_counts(flat, col_of, shape, coprime=True)

    need_n = bool({"n", "n_tilde"} & wanted)
    sigs: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    if need_n:
        results = parallel_map(lambda k: _key_counts(qs[k], pairs[k], Q, col_of, shape, False),
                               range(len(qs)), workers)
        grid.counters["n"] = sum((r[0] for r in results), np.zeros(shape, dtype=np.int64))
        sigs = {qs[k]: (r[1], r[2]) for k, r in enumerate(results)}
    if "n_star" in wanted:
        results = parallel_map(lambda k: _key_counts(qs[k], pairs[k], Q, col_of, shape, True)[0],
                               range(len(qs)), workers)
        grid.counters["n_star"] = sum(results, np.zeros(shape, dtype=np.int64))

    if "n_tilde" in wanted:
        xs, js = np.nonzero(grid.counters["n"])
        tilde = np.zeros(shape, dtype=np.int64)
        tilde[xs, js] = _tilde_counts(sigs, xs, js, N, tilde_cap)
        grid.counters["n_tilde"] = tilde

    log.debug("census Q=%d 2^l=%d N=%d: %d t-columns", Q, level.two_l, N, columns.size)
    return grid


def census_oracle(N: int, level: DyadicLevel) -> Dict[Tuple[int, int], Dict[str, int]]:
    """
    Exhaustive census with exact fractions, factored per (q1, q2): the t-bins of
    every (a1, a2) and the x-bins of every (b1, b2) are tallied separately and
    then crossed. A key (q1, b1) sits in box (ix, it) iff one q2 reaches both
    bins. Q <= ORACLE_Q_CAP.
    """
    if level.Q > ORACLE_Q_CAP:
        raise GuardExceeded(f"census oracle is limited to Q <= {ORACLE_Q_CAP}")
    Q = level.Q
    Kx = level.two_l * Q
    Kt = N * level.two_l * Q
    qs = list(level.q_values())

    def bin_of(u1: int, q1: int, u2: int, q2: int, K: int) -> int:
        return math.floor(mod1(Fraction(u1, q1) + Fraction(u2, q2)) * K)

    tuples: Counter = Counter()
    tuples_star: Counter = Counter()
    keys: Dict[Tuple[int, int], Set[Tuple[int, int]]] = defaultdict(set)
    keys_star: Dict[Tuple[int, int], Set[Tuple[int, int]]] = defaultdict(set)
    for q1 in qs:
        t_masks: Dict[int, int] = defaultdict(int)
        x_masks: Dict[Tuple[int, int], int] = defaultdict(int)
        star = 0
        for q2 in qs:
            bit = 1 << (q2 - Q)
            coprime = math.gcd(q1, q2) == 1
            if coprime:
                star |= bit
            t_hist = Counter(bin_of(a1, q1, a2, q2, Kt) for a1 in a_labels(q1) for a2 in a_labels(q2))
            x_hist: Counter = Counter()
            for b1 in b_labels(q1):
                for b2 in b_labels(q2):
                    ix = bin_of(b1, q1, b2, q2, Kx)
                    x_hist[ix] += 1
                    x_masks[(b1, ix)] |= bit
            for it in t_hist:
                t_masks[it] |= bit
            for ix, cx in x_hist.items():
                for it, ct in t_hist.items():
                    tuples[(ix, it)] += cx * ct
                    if coprime:
                        tuples_star[(ix, it)] += cx * ct
        for (b1, ix), xm in x_masks.items():
            for it, tm in t_masks.items():
                hit = xm & tm
                if hit:
                    keys[(ix, it)].add((q1, b1))
                    if hit & star:
                        keys_star[(ix, it)].add((q1, b1))
    out = {}
    for box, n in tuples.items():
        values = {Fraction(b1, q1) for q1, b1 in keys[box]}
        out[box] = {
            "N": n,
            "N_star": tuples_star.get(box, 0),
            "n": len(keys[box]),
            "n_star": len(keys_star.get(box, ())),
            "n_tilde": max_separated(((v, v) for v in values), Fraction(1, N)),
        }
    return out


__all__ = [
    "VARIANTS",
    "BOX_CSV_COLUMNS",
    "BoxGrid",
    "CensusSummary",
    "tuple_count",
    "box_census",
    "census_oracle",
]
