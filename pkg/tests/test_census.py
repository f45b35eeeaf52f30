# tests/test_census.py
import pytest

from levelset_lab.arcs import DyadicLevel
from levelset_lab.census import (
    VARIANTS,
    box_census,
    census_oracle,
    tuple_count,
)
from levelset_lab.errors import GuardExceeded, InputError


@pytest.mark.parametrize("Q,l,N", [(1, 0, 8), (2, 0, 8), (2, 1, 16), (4, 1, 16)])
def test_census_matches_oracle(Q, l, N):
    level = DyadicLevel(Q, l)
    grid = box_census(N, level)
    want = census_oracle(N, level)
    assert set(grid.nonzero()) == set(want)
    for box, counts in want.items():
        assert grid.counts_at(*box) == counts, box


def test_totals_match_tuple_count():
    level = DyadicLevel(4, 1)
    summary = box_census(16, level, variants=("N", "N_star")).summary()
    assert summary.total_N == tuple_count(level)
    assert summary.total_N_star == tuple_count(level, coprime=True)
    # sum over q in [4, 8) of (signed units) * (2q - 1)
    assert tuple_count(level) == 300 ** 2


def test_key_counts_are_dominated():
    grid = box_census(32, DyadicLevel(4, 2))
    for box in grid.nonzero():
        c = grid.counts_at(*box)
        assert 1 <= c["n"] <= c["N"]
        assert c["n_star"] <= c["n"]
        assert c["n_star"] <= c["N_star"]
        assert 1 <= c["n_tilde"] <= c["n"]


def test_workers_do_not_change_counts():
    level = DyadicLevel(4, 1)
    one = box_census(16, level, workers=1)
    three = box_census(16, level, workers=3)
    assert one.rows() == three.rows()


def test_n_tilde_filled_on_every_box():
    level = DyadicLevel(2, 1)
    grid = box_census(16, level)
    want = census_oracle(16, level)
    rows = grid.rows()
    assert len(rows) == len(want)
    assert all(row["n_tilde"] != "" and row["n_tilde"] >= 1 for row in rows)
    assert grid.summary().nonzero_boxes == len(rows)
    with pytest.raises(GuardExceeded):
        box_census(16, level, variants=("n_tilde",), tilde_cap=1)


@pytest.mark.parametrize("Q,l,N", [(8, 1, 16), pytest.param(16, 0, 16, marks=pytest.mark.slow)])
def test_census_matches_factored_oracle_at_larger_q(Q, l, N):
    level = DyadicLevel(Q, l)
    grid = box_census(N, level, workers=2)
    want = census_oracle(N, level)
    assert set(grid.nonzero()) == set(want)
    for box, counts in want.items():
        assert grid.counts_at(*box) == counts, box


def test_variant_selection_and_rows():
    grid = box_census(8, DyadicLevel(2, 0), variants=("n",))
    assert grid.variants == ("n",)
    rows = grid.rows(limit=3)
    assert len(rows) == 3
    assert rows[0]["N"] == ""
    summary = grid.summary().as_dict()
    assert summary["total_N"] == 0
    assert summary["total_n"] > 0


def test_guards():
    with pytest.raises(InputError):
        box_census(8, DyadicLevel(2, 0), variants=("bogus",))
    with pytest.raises(InputError):
        box_census(8, DyadicLevel(2, 0), variants=())
    with pytest.raises(GuardExceeded):
        box_census(1 << 10, DyadicLevel(64, 0), variants=("N",))
    with pytest.raises(GuardExceeded):
        box_census(1 << 10, DyadicLevel(128, 0), variants=("n",))
    with pytest.raises(GuardExceeded):
        census_oracle(64, DyadicLevel(32, 0))
    assert set(VARIANTS) == {"N", "N_star", "n", "n_star", "n_tilde"}
