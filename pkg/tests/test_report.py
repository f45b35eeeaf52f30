# tests/test_report.py
import csv
import json
import math
from fractions import Fraction

import numpy as np

from levelset_lab.config import ProbeConfig
from levelset_lab.report import ProbeReport, config_digest, dumps, write_csv, write_report


def test_assertion_lines_and_ratio():
    rep = ProbeReport("levelset")
    ok = rep.check_upper("a", "anchor", 2.0, 4.0)
    bad = rep.check_window("b", "anchor", 0.5, 0.6, 0.9)
    zero = rep.check_upper("c", "anchor", 0.0, 0.0)
    assert ok.passed and ok.ratio == 0.5
    assert not bad.passed and bad.note == "window [0.6, 0.9]"
    assert zero.passed and zero.ratio == 0.0
    assert not rep.passed
    assert rep.failures == [bad]
    assert rep.worst_ratio == 0.5 / 0.9

    inf = rep.check_upper("d", "anchor", 1.0, 0.0)
    assert math.isinf(inf.ratio)
    assert rep.worst_ratio == 0.5 / 0.9


def test_csv_splits_complex_and_formats_fractions(tmp_path):
    rows = [
        {"x": Fraction(1, 3), "S": complex(1.5, -2.0), "n": np.int64(4), "v": 0.1},
        {"x": Fraction(-1, 2), "S": np.complex128(0.25j), "n": 5, "v": None},
    ]
    p = write_csv(tmp_path / "t.csv", ["x", "S", "n", "v"], rows)
    with p.open(encoding="utf-8") as fh:
        lines = list(csv.reader(fh))
    assert lines[0] == ["x", "S_re", "S_im", "n", "v"]
    assert lines[1] == ["1/3", "1.5", "-2.0", "4", "0.1"]
    assert lines[2] == ["-1/2", "0.0", "0.25", "5", ""]


def test_json_is_sorted_and_plain():
    text = dumps({"b": Fraction(3, 4), "a": (1, np.int64(2)), "c": np.array([1.5, 2.5])})
    data = json.loads(text)
    assert list(data) == ["a", "b", "c"]
    assert data == {"a": [1, 2], "b": "3/4", "c": [1.5, 2.5]}


def test_write_report_files(tmp_path):
    rep = ProbeReport("lp", inputs={"N": 64})
    rep.check_upper("norm", "anchor", 1.0, 2.0)
    rep.add_table("norms", ["N", "norm"], [{"N": 64, "norm": 1.0}])
    rep.wall_clock_s = 12.5
    paths = write_report(rep, tmp_path)
    assert [p.name for p in paths] == ["lp.json", "lp_norms.csv"]
    doc = json.loads(paths[0].read_text(encoding="utf-8"))
    assert doc["passed"] is True
    assert doc["tables"] == ["norms"]
    assert "wall_clock_s" not in doc


def test_config_digest_is_deterministic():
    a = config_digest(ProbeConfig(N=64, C_t="3/2"))
    b = config_digest(ProbeConfig(C_t=Fraction(3, 2), N=64))
    c = config_digest(ProbeConfig(N=128))
    assert a == b != c
    assert config_digest({"y": 1, "x": Fraction(1, 2)}) == config_digest({"x": Fraction(1, 2), "y": 1})
