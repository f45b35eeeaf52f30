# tests/test_constructions.py
import json
from fractions import Fraction

import pytest

from levelset_lab.arcs import DyadicLevel, TorusPoint
from levelset_lab.constructions import (
    KINDS,
    BUILDERS,
    build_bipartite,
    build_enemies,
    build_fixed_denominator,
    build_from_params,
    build_prime_reciprocal,
    build_random_baseline,
    build_sharp_c1,
    build_sqrt_admissible,
    build_x_only,
    construction_from_json,
    edge_density,
    enemies_size_floor,
    result_to_json,
    sqrt_admissible_family,
    x_only_oracle,
)
from levelset_lab.errors import ConstructionError
from levelset_lab.graph_lab import build_graph


def _graph(c):
    return build_graph(c.points, c.N, c.level, edge_rule=c.edge_rule, rule_name=c.rule_name)


# -------------------- enemies --------------------

def test_enemies_family_size_and_spacing():
    fam = build_enemies(1 << 12, 32, 4, 2, 1)
    assert fam.t == Fraction(1, 4) and fam.x == Fraction(1, 8)
    # q1 in {32, 40, 48, 56}: phi sums to 72
    assert fam.size == 72
    assert fam.size >= enemies_size_floor(32, 4, 2)
    assert fam.min_gap >= Fraction(1, 1 << 12)
    assert fam.separated_count() == fam.size
    for m in fam.members:
        l1, l2 = m.labels()
        assert l1.t + l2.t == fam.t
        assert l1.x + l2.x == fam.x


def test_enemies_parameter_checks():
    with pytest.raises(ConstructionError):
        build_enemies(16, 32, 4, 2, 1)
    with pytest.raises(ConstructionError):
        build_enemies(1 << 12, 32, 4, 9, 1)
    with pytest.raises(ConstructionError):
        build_enemies(1 << 12, 32, 4, 2, 4)


# -------------------- sharp example --------------------

def test_sharp_example_layout_and_edges():
    c = build_sharp_c1(1 << 10, 5, DyadicLevel(4, 6), 2.0)
    assert c.params["J"] == 2
    # 5 centres, 4 grid offsets each, j in [2, 2]
    assert c.R == 20 == c.predicted["R_exact"].value
    g = build_graph(c.points, c.N, c.level)
    # pairs with different b/q; equal t leaves no unit a
    assert g.edge_count == 190 - 5 * 6
    assert edge_density(g.edge_count, g.R) >= float(c.predicted["pair_fraction_floor"].value)


def test_sharp_example_rejects_bad_parameters():
    with pytest.raises(ConstructionError):
        build_sharp_c1(1 << 10, 6, DyadicLevel(4, 6), 2.0)
    with pytest.raises(ConstructionError):
        build_sharp_c1(1 << 10, 11, DyadicLevel(4, 6), 2.0)
    with pytest.raises(ConstructionError):
        build_sharp_c1(1 << 10, 5, DyadicLevel(4, 6), 3.0)


# -------------------- K ~ 1 graphs --------------------

def test_fixed_denominator():
    c = build_fixed_denominator(5)
    assert c.R == 9
    assert c.level == DyadicLevel(4, 0)
    assert c.predicted["triple"].value == (4, 1, 1)
    with pytest.raises(ConstructionError):
        build_fixed_denominator(6)


def test_prime_reciprocal_base_and_modified():
    c = build_prime_reciprocal(64)
    assert c.predicted["primes"].value == (11, 13)
    assert c.R == 2 * 10 + 2 * 12
    g = _graph(c)
    # distinct denominators only
    assert g.edge_count == 20 * 24

    m = build_prime_reciprocal(64, modified_d=2)
    assert m.rule_name == "modified_reciprocal"
    assert all(p.t.numerator == 1 for p in m.points)
    with pytest.raises(ConstructionError):
        build_prime_reciprocal(64, modified_d=4)


def test_bipartite_is_complete_between_sides():
    c = build_bipartite(4, 8)
    assert c.R == 40
    g = _graph(c)
    assert g.edge_count == 400
    assert g.K_emp == pytest.approx(2.0)
    assert c.predicted["K"].value == Fraction(2)
    with pytest.raises(ConstructionError):
        build_bipartite(4, 4)


def test_bipartite_with_independent_t_numerators():
    c = build_bipartite(4, 8, c_mult=2)
    assert c.R == 40
    assert c.params["c_mult"] == 2
    assert any(p.x != p.t for p in c.points)
    assert all(p.t.denominator == p.x.denominator for p in c.points)
    # b = 1 over r = 5 pairs with c = 2, b = -1 with c = -2
    assert TorusPoint(Fraction(1, 5), Fraction(2, 5)) in c.points
    assert TorusPoint(Fraction(-1, 5), Fraction(-2, 5)) in c.points
    assert _graph(c).edge_count == 400
    with pytest.raises(ConstructionError):
        build_bipartite(4, 8, c_mult=5)


# -------------------- square-root admissible --------------------

def test_sqrt_admissible_instance():
    inst = build_sqrt_admissible(3, 5, 7, 1, 2, 1, 1)
    assert (inst.q1, inst.q2) == (21, 35)
    assert inst.t == Fraction(1, 15)
    assert inst.x == Fraction(-2, 15)
    assert (inst.profile.d, inst.profile.p, inst.profile.f) == (7, 7, 7)
    assert (inst.witness.a1, inst.witness.a2) == (-4, 9)


def test_sqrt_admissible_family_and_errors():
    fam = sqrt_admissible_family(5, 7, 1, 1, 1, 1, 64)
    assert [(i.q1, i.q2) for i in fam] == [(65, 91)]
    with pytest.raises(ConstructionError):
        build_sqrt_admissible(4, 5, 7, 1, 1, 1, 1)
    with pytest.raises(ConstructionError):
        build_sqrt_admissible(5, 5, 7, 1, 1, 1, 1)


# -------------------- baseline / x-only --------------------

def test_random_baseline_is_seeded_and_separated():
    level = DyadicLevel(4, 0)
    a = build_random_baseline(16, 64, level, seed=9)
    b = build_random_baseline(16, 64, level, seed=9)
    assert a.points == b.points
    assert a.R == 16
    with pytest.raises(ConstructionError):
        build_random_baseline(40, 64, level)


@pytest.mark.parametrize("N,Q,l", [(64, 4, 1), (128, 8, 2), (256, 2, 0)])
def test_x_only_matches_oracle(N, Q, l):
    rep = build_x_only(N, Q, l)
    assert rep.hits == x_only_oracle(N, Q, l)
    assert 0 < rep.fraction <= 1
    assert rep.pair_count == rep.hits * N


# -------------------- registry / json --------------------

def test_registry_covers_every_kind():
    assert set(BUILDERS) == set(KINDS)


def test_build_from_params():
    c = build_from_params("fixed_denominator", {"q": "5"})
    assert c.R == 9
    fam = build_from_params("enemies", {"N": 4096, "Q": 32, "q": 4, "r": 2, "a": 1})
    assert fam.size == 72
    with pytest.raises(ConstructionError, match="missing parameters: q, r, a"):
        build_from_params("enemies", {"N": 4096, "Q": 32})
    with pytest.raises(ConstructionError):
        build_from_params("bogus", {})


def test_json_forms_are_serializable():
    for obj in (
        build_fixed_denominator(5),
        build_enemies(1 << 12, 32, 4, 2, 1),
        build_sqrt_admissible(3, 5, 7, 1, 2, 1, 1),
        build_x_only(64, 4, 1),
    ):
        json.dumps(result_to_json(obj))
    with pytest.raises(ConstructionError):
        result_to_json(object())


def test_construction_json_rebuilds_edge_rule():
    c = build_bipartite(4, 8)
    back = construction_from_json(json.loads(json.dumps(c.as_json())))
    assert back.points == c.points
    assert back.level == c.level
    assert _graph(back).edge_count == 400

    with pytest.raises(ConstructionError):
        construction_from_json({"kind": "x"})
