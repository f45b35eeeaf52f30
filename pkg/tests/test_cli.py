# tests/test_cli.py
import json

from typer.testing import CliRunner

from cli.main import app, run_cli

runner = CliRunner()


def _run(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_arcs_counts_and_lists_cells(tmp_path):
    r = _run("arcs", "--N", 16, "--Q", 4, "--l", 1)
    assert r.exit_code == 0, r.output
    assert r.output.strip() == "cells=82"

    r = _run("arcs", "--N", 16, "--Q", 4, "--l", 1, "--list", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert "cells=82" in r.output
    lines = (tmp_path / "arcs.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "q,a,b,x_lo,x_hi,t_lo,t_hi"
    assert len(lines) == 83


def test_arcs_classify():
    r = _run("arcs", "--N", 64, "--Q", 4, "--l", 1, "--classify", "2/5,3/5")
    assert r.exit_code == 0, r.output
    assert "q=5 a=3 b=2" in r.output
    r = _run("arcs", "--N", 8, "--Q", 16)
    assert r.exit_code == 2


def test_kernel_point_evaluation():
    r = _run("kernel", "--N", 64, "--x", "0", "--t", "1/3")
    assert r.exit_code == 0, r.output
    assert r.output.startswith("K(0/1, 1/3) = ")
    assert "t~1/3 (Q=2," in r.output


def test_profile_command(tmp_path):
    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps([[1, 1, 3], [1, 1, 6]]), encoding="utf-8")
    r = _run("profile", "--labels", labels, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert "d=3 p=3 f=3" in r.output
    assert (tmp_path / "profiles.csv").exists()

    labels.write_text(json.dumps([[2, 0, 4], [1, 0, 3]]), encoding="utf-8")
    r = _run("profile", "--labels", labels)
    assert r.exit_code == 2
    assert _run("profile", "--labels", tmp_path / "absent.json").exit_code == 2


def test_admissible_command(tmp_path):
    r = _run("admissible", "--x", "13/20", "--t", "9/20", "--N", 64, "--Q", 4, "--l", 1, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert r.output.startswith("pairs=")
    assert "ok   largest b1 set" in r.output
    rows = (tmp_path / "admissible_pairs.csv").read_text(encoding="utf-8").splitlines()
    assert any(row.startswith("4,5,") for row in rows[1:])
    doc = json.loads((tmp_path / "admissible.json").read_text(encoding="utf-8"))
    assert doc["passed"] is True

    r = _run("admissible", "--x", "13/20", "--t", "9/20", "--N", 64, "--Q", 4, "--l", 1,
             "--constant", "0.001", "--out", tmp_path)
    assert r.exit_code == 1
    assert "FAIL largest b1 set" in r.output


def test_boxes_command(tmp_path):
    r = _run("boxes", "--N", 16, "--Q", 2, "--l", 1, "--variant", "N", "--variant", "n", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    summary = json.loads((tmp_path / "boxes_summary.json").read_text(encoding="utf-8"))
    # signed units times (2q - 1) for q = 2, 3: (2*3 + 4*5)^2
    assert summary["total_N"] == 26 ** 2
    assert _run("boxes", "--Q", 2, "--variant", "bogus", "--out", tmp_path).exit_code == 2


def test_construct_then_analyze(tmp_path):
    r = _run("construct", "--kind", "fixed_denominator", "--q", 5, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert "kind=fixed_denominator size=9" in r.output
    assert (tmp_path / "construction.json").exists()

    r = _run("graph", "--analyze", "--fork", "--K", 1.5, "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert "R=9 E=32" in r.output
    assert "dominant triple D=4 P=1 F=1" in r.output
    analysis = json.loads((tmp_path / "graph_analysis.json").read_text(encoding="utf-8"))
    assert analysis["triple"] == [4, 1, 1]
    assert analysis["floor_ok"] is True
    assert analysis["fork"]["violations"] == 0


def test_construct_failure_emits_event(tmp_path, memory_sink):
    r = _run("construct", "--kind", "fixed_denominator", "--q", 6, "--out", tmp_path)
    assert r.exit_code == 2
    (event,) = memory_sink.payloads
    assert event["type"] == "probe.failed" and event["kind"] == "construct"
    assert event["reason"].startswith("ConstructionError")


def test_construct_extra_params(tmp_path):
    r = _run("construct", "--kind", "enemies", "--N", 4096, "--Q", 32, "--q", 4,
             "--param", "r=2", "--param", "a=1", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    assert "size=72" in r.output
    assert _run("construct", "--kind", "enemies", "--param", "r2", "--out", tmp_path).exit_code == 2


def test_probe_missing_config_exits_2(tmp_path, memory_sink):
    r = _run("probe", "--config", tmp_path / "absent.json")
    assert r.exit_code == 2
    assert memory_sink.payloads[0]["reason"].startswith("ConfigMissing")


def test_probe_case_bounds_writes_report(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"probe": "case_bounds", "N_ladder": [64, 256]}), encoding="utf-8")
    out = tmp_path / "out"
    r = _run("probe", "--config", cfg, "--out", out)
    assert r.exit_code == 0, r.output
    doc = json.loads((out / "case_bounds.json").read_text(encoding="utf-8"))
    assert doc["passed"] is True
    assert len(doc["config_digest"]) == 40
    assert (out / "case_bounds_cases.csv").exists()
    assert "FAIL" not in r.output


def test_run_cli_returns_exit_codes(tmp_path):
    assert run_cli(["arcs", "--N", "16", "--Q", "4", "--l", "1"]) == 0
    assert run_cli(["arcs", "--N", "8", "--Q", "16"]) == 2
    assert run_cli(["no-such-command"]) == 2
    assert run_cli(["probe", "--config", str(tmp_path / "absent.json")]) == 2
