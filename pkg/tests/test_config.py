# tests/test_config.py
import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from levelset_lab.config import ProbeConfig, load_config, load_settings_from_env, resolve_config
from levelset_lab.errors import ConfigInvalid, ConfigMissing, GuardExceeded
from levelset_lab.exp_sum import MAX_N


def _write(tmp_path, data, name="probe.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data), encoding="utf-8")
    return p


def test_defaults_are_valid_and_canonical():
    cfg = ProbeConfig()
    assert cfg.probe == "levelset"
    assert cfg.C_t == Fraction(1)
    text = cfg.canonical_json()
    assert text == ProbeConfig().canonical_json()
    assert list(json.loads(text)) == sorted(json.loads(text))
    assert json.loads(text)["shrink"] == "1/10"


def test_rationals_accept_strings_ints_and_floats():
    cfg = ProbeConfig(C_t="3/2", C_x=2, shrink=0.25)
    assert (cfg.C_t, cfg.C_x, cfg.shrink) == (Fraction(3, 2), Fraction(2), Fraction(1, 4))
    with pytest.raises(ValidationError):
        ProbeConfig(C_t="abc")


def test_dump_then_load_is_stable(tmp_path):
    cfg = ProbeConfig(probe="conditional", N=64, levels=[(16, 2)], C_t="3/2", seed=5)
    p = tmp_path / "cfg.json"
    p.write_text(cfg.model_dump_json(), encoding="utf-8")
    back = load_config(p)
    assert back.canonical_json() == cfg.canonical_json()
    assert back.levels == [(16, 2)]


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"N": 0},
        {"scheme": "nope"},
        {"schemes": ["constant_normalized", "nope"]},
        {"levels": [[12, 1]]},
        {"probe": "fft"},
        {"exponent_window": [0.5, 0.1]},
        {"workers": 0},
    ],
)
def test_invalid_documents(tmp_path, data):
    with pytest.raises(ConfigInvalid):
        load_config(_write(tmp_path, data))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigMissing):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigInvalid):
        load_config(bad)


def test_overrides_revalidate():
    cfg = ProbeConfig(seed=4)
    assert cfg.with_overrides(N=64, seed=None).seed == 4
    assert cfg.with_overrides(N=64).N == 64
    with pytest.raises(ConfigInvalid):
        cfg.with_overrides(N=0)


def test_guards():
    with pytest.raises(GuardExceeded):
        ProbeConfig(N=MAX_N * 2).check_guards()
    with pytest.raises(GuardExceeded):
        ProbeConfig(N_ladder=[64, MAX_N * 2]).check_guards()
    with pytest.raises(GuardExceeded):
        ProbeConfig(probe="conditional", levels=[(512, 0)]).check_guards()
    # the system cap only binds the conditional probe
    ProbeConfig(probe="levelset", levels=[(512, 0)]).check_guards()


def test_env_settings(monkeypatch):
    monkeypatch.setenv("LAB_WORKERS", "0")
    monkeypatch.setenv("LAB_SEED", " 12 ")
    s = load_settings_from_env()
    assert s.workers == 1
    assert s.seed == 12
    assert s.out_dir == "out"


def test_resolve_order(tmp_path, monkeypatch):
    monkeypatch.setenv("LAB_WORKERS", "3")
    monkeypatch.setenv("LAB_SEED", "7")
    monkeypatch.setenv("LAB_OUT_DIR", str(tmp_path / "env_out"))

    cfg = resolve_config()
    assert cfg.workers == 3 and cfg.seed == 7
    assert cfg.out_dir == str(tmp_path / "env_out")

    # file values beat env for workers; env seed always wins over the file
    p = _write(tmp_path, {"workers": 2, "seed": 1, "N": 64})
    cfg = resolve_config(p)
    assert cfg.workers == 2 and cfg.seed == 7 and cfg.N == 64

    # explicit overrides beat both
    cfg = resolve_config(p, seed=11, workers=5, N=None)
    assert (cfg.seed, cfg.workers, cfg.N) == (11, 5, 64)
