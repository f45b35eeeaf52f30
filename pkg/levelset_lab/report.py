# levelset_lab/report.py
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from levelset_lab.arith import format_fraction


# -------------------- assertions --------------------

@dataclass
class AssertionLine:
    name: str
    anchor: str          # the statement the bound comes from
    observed: float
    bound: float
    passed: bool
    note: str = ""

    @property
    def ratio(self) -> float:
        if self.bound == 0:
            return 0.0 if self.observed == 0 else math.inf
        return self.observed / self.bound

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "observed": self.observed,
            "bound": self.bound,
            "ratio": self.ratio,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class ProbeReport:
    probe: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    measured: Dict[str, Any] = field(default_factory=dict)
    assertions: List[AssertionLine] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    columns: Dict[str, List[str]] = field(default_factory=dict)
    config_digest: str = ""
    wall_clock_s: float = 0.0  # kept in memory only

    def check_upper(self, name: str, anchor: str, observed: float, bound: float,
                    note: str = "") -> AssertionLine:
        """observed <= bound."""
        line = AssertionLine(name, anchor, float(observed), float(bound),
                             bool(observed <= bound), note)
        self.assertions.append(line)
        return line

    def check_window(self, name: str, anchor: str, observed: float, low: float, high: float,
                     note: str = "") -> AssertionLine:
        """low <= observed <= high; the bound column holds the upper end."""
        line = AssertionLine(name, anchor, float(observed), float(high),
                             bool(low <= observed <= high), note or f"window [{low:g}, {high:g}]")
        self.assertions.append(line)
        return line

    def add_table(self, name: str, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
        self.columns[name] = list(columns)
        self.tables[name] = [dict(r) for r in rows]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> List[AssertionLine]:
        return [a for a in self.assertions if not a.passed]

    @property
    def worst_ratio(self) -> Optional[float]:
        finite = [a.ratio for a in self.assertions if math.isfinite(a.ratio)]
        return max(finite) if finite else None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "probe": self.probe,
            "config_digest": self.config_digest,
            "inputs": self.inputs,
            "measured": self.measured,
            "assertions": [a.as_dict() for a in self.assertions],
            "passed": self.passed,
            "tables": sorted(self.tables),
        }


# -------------------- serialization --------------------

def _plain(v: Any) -> Any:
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _json_default(v: Any) -> Any:
    out = _plain(v)
    if out is v:
        raise TypeError(f"not JSON serializable: {type(v).__name__}")
    return out


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2, default=_json_default) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(obj), encoding="utf-8")
    return p


def _complex_columns(columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> set:
    return {c for c in columns
            if any(isinstance(r.get(c), (complex, np.complexfloating)) for r in rows)}


def csv_header(columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> List[str]:
    cplx = _complex_columns(columns, rows)
    header: List[str] = []
    for c in columns:
        header.extend([f"{c}_re", f"{c}_im"] if c in cplx else [c])
    return header


def _cell(v: Any) -> Any:
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def write_csv(path: str | Path, columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> Path:
    """One header line, columns in the given order, complex values split into _re/_im."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    cplx = _complex_columns(columns, rows)
    with p.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(columns, rows))
        for r in rows:
            line: List[Any] = []
            for c in columns:
                v = r.get(c)
                if c in cplx:
                    z = complex(v) if v is not None else complex(0)
                    line.extend([repr(z.real), repr(z.imag)])
                else:
                    line.append(_cell(v))
            w.writerow(line)
    return p


def write_report(report: ProbeReport, out_dir: str | Path) -> List[Path]:
    """<probe>.json plus one <probe>_<table>.csv per table. Wall-clock is not written."""
    out = Path(out_dir)
    paths = [write_json(out / f"{report.probe}.json", report.as_dict())]
    for name in sorted(report.tables):
        paths.append(write_csv(out / f"{report.probe}_{name}.csv",
                               report.columns[name], report.tables[name]))
    return paths


def config_digest(config: Any) -> str:
    """SHA-1 of the canonical (sorted-key, compact) config JSON."""
    if hasattr(config, "canonical_json"):
        text = config.canonical_json()
    else:
        text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


__all__ = [
    "AssertionLine",
    "ProbeReport",
    "dumps",
    "write_json",
    "csv_header",
    "write_csv",
    "write_report",
    "config_digest",
]
