# tests/test_probes.py
from fractions import Fraction

import pytest

from levelset_lab import probes
from levelset_lab.arcs import DyadicLevel
from levelset_lab.config import ProbeConfig
from levelset_lab.counting import (
    AdmissiblePair,
    AdmissibleQuery,
    Witness,
    b_witness_bound,
    b_witness_set,
    enumerate_admissible,
)
from levelset_lab.errors import GuardExceeded, InputError
from levelset_lab.exp_sum import MAX_N
from levelset_lab.probes import (
    ADVERSARIAL_TARGETS,
    admissible_report,
    case_inequalities,
    fit_exponent,
    get_probe,
    log_budget,
    probe_case_bounds,
    probe_conditional,
    probe_levelset,
    probe_lp,
    run_probe,
)
from levelset_lab.report import config_digest


def test_log_budget_and_fit():
    assert log_budget(64, 3) == 216
    assert log_budget(1, 2) == 1
    assert fit_exponent([16, 32, 64], [4.0, 8.0, 16.0]) == pytest.approx(1.0)
    assert fit_exponent([16, 64], [3.0, 3.0]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InputError):
        fit_exponent([16], [1.0])
    with pytest.raises(InputError):
        fit_exponent([16, 32], [1.0, 0.0])


def test_levelset_probe_small():
    cfg = ProbeConfig(N=64, c_t=1, lambda_exponents=[0.25, 0.4, 0.5], sharp_Q=[8, 128])
    rep = probe_levelset(cfg)
    rows = rep.tables["ratios"]
    # three ladder rows, one sharp row (Q = 128 > N is skipped)
    assert [r["kind"] for r in rows] == ["ladder", "ladder", "ladder", "sharp"]
    ceilings = [a for a in rep.assertions if a.name.startswith("ceiling")]
    assert len(ceilings) == 2 and all(a.passed for a in ceilings)
    assert any(a.name == "sharpness floor Q=8" for a in rep.assertions)
    assert rep.measured["x_points"] > 0


def test_levelset_rejects_lambda_outside_range():
    with pytest.raises(InputError):
        probe_levelset(ProbeConfig(N=64, c_t=1, lambda_exponents=[0.1]))


def test_lp_probe_single_frequency_is_flat():
    cfg = ProbeConfig(probe="lp", p=6.0, c_t=1, N_ladder=[16, 32],
                      schemes=["single_frequency", "constant_normalized"])
    rep = probe_lp(cfg)
    line = next(a for a in rep.assertions if a.name == "single frequency exponent")
    assert line.passed
    assert {r["scheme"] for r in rep.tables["fits"]} == {"single_frequency", "constant_normalized"}
    assert len(rep.tables["norms"]) == 4
    assert "prime_levelset" not in rep.tables


def test_lp_probe_prime_table_and_bad_p():
    cfg = ProbeConfig(probe="lp", p=4.0, c_t=1, N_ladder=[16, 32], schemes=["prime_support_cubic"],
                      lambda_exponents=[0.25, 0.5])
    rep = probe_lp(cfg)
    assert [r["N"] for r in rep.tables["prime_levelset"]] == [32, 32]
    with pytest.raises(InputError):
        probe_lp(cfg.with_overrides(p=3.0))


@pytest.mark.slow
def test_conditional_probe_small_level():
    cfg = ProbeConfig(probe="conditional", N=32, levels=[(4, 1)], samples=6, alpha_cap=4)
    rep = probe_conditional(cfg)
    rows = rep.tables["samples"]
    adversarial = [r for r in rows if r["kind"] == "adversarial" and r["variant"] == "two"]
    assert len(adversarial) == len(ADVERSARIAL_TARGETS)
    assert {r["variant"] for r in rows} == {"two", "four"}
    summary = rep.measured["summaries"][0]
    assert summary["samples"] == 6
    assert rep.passed


def test_case_inequalities():
    v = case_inequalities(64, 8, 8, 8, 1, 1)
    assert v["i"] == pytest.approx(1 / 64)
    assert v["ii"] == pytest.approx(1 / 512)
    assert v["iii"] is not None
    assert case_inequalities(64, 8, 8, 8, 8, 8)["iii"] is None


def test_case_bounds_probe_passes():
    rep = probe_case_bounds(ProbeConfig(probe="case_bounds", N_ladder=[64, 256, 1024]))
    assert rep.passed
    assert rep.measured["consistency_failures"] == 0
    assert len(rep.tables["cases"]) == 9


def test_case_bounds_flags_regimes_that_disagree_with_k(monkeypatch):
    assert probes.case_regimes(12, 4) == {"i": True, "ii": False, "iii": True}
    monkeypatch.setattr(probes, "case_regimes", lambda logN, l: {"i": True, "ii": True, "iii": True})
    rep = probe_case_bounds(ProbeConfig(probe="case_bounds", N_ladder=[64]))
    assert rep.measured["consistency_failures"] > 0
    assert not rep.passed


# -------------------- admissible pairs --------------------

def _known_query():
    # 1/4 + 1/5 and 1/4 + 2/5
    return AdmissibleQuery(Fraction(13, 20), Fraction(9, 20), 64, DyadicLevel(4, 1), D=1, P=1, F=1)


def test_admissible_report_checks_every_bound():
    query = _known_query()
    rep = admissible_report(query)
    assert rep.passed
    lines = {a.name: a for a in rep.assertions}
    assert set(lines) == {"admissible pairs", "largest b1 set",
                          "separated representations (intervals)", "pairs with several p values"}
    pairs = enumerate_admissible(query)
    widest = max(len(b_witness_set(p.q1, p.q2, query)) for p in pairs)
    assert lines["largest b1 set"].observed == widest
    assert lines["largest b1 set"].bound == pytest.approx(64 * 6 * b_witness_bound(query))
    assert lines["admissible pairs"].observed == len(pairs)
    assert lines["pairs with several p values"].observed == 0
    assert [(r["q1"], r["q2"]) for r in rep.tables["pairs"]] == [p.key() for p in pairs]

    tight = admissible_report(query, constant=1e-6)
    assert {a.name for a in tight.failures} >= {"admissible pairs", "largest b1 set"}


def test_admissible_report_fails_when_p_drifts(monkeypatch):
    drifting = AdmissiblePair(4, 5, 1, 1, [Witness(1, 1, 1, 2, 1, 1), Witness(1, 2, 1, 2, 1, 2)])
    monkeypatch.setattr(probes, "enumerate_admissible", lambda query, workers=1: [drifting])
    rep = admissible_report(_known_query())
    (failure,) = rep.failures
    assert failure.name == "pairs with several p values"
    assert failure.observed == 1
    assert failure.note == "4x5"


def test_run_probe_emits_completed_event(memory_sink):
    cfg = ProbeConfig(probe="case_bounds", N_ladder=[64])
    rep = run_probe(cfg)
    assert rep.config_digest == config_digest(cfg)
    (event,) = memory_sink.payloads
    assert event["type"] == "probe.completed"
    assert event["config_digest"] == rep.config_digest
    assert event["passed"] is True
    assert event["assertions"] == len(rep.assertions)


def test_run_probe_emits_failed_event(memory_sink):
    with pytest.raises(GuardExceeded):
        run_probe(ProbeConfig(N=MAX_N * 2))
    with pytest.raises(InputError):
        run_probe(ProbeConfig(N=64, c_t=1, lambda_exponents=[0.9]))
    reasons = [p["reason"] for p in memory_sink.payloads]
    assert all(p["type"] == "probe.failed" for p in memory_sink.payloads)
    assert reasons[0].startswith("GuardExceeded")
    assert reasons[1].startswith("InputError")


def test_get_probe_unknown():
    with pytest.raises(InputError):
        get_probe("fft")
