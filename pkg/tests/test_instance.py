import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from flg.generators import gen_gstar, gen_random
from flg.instance import (InstanceError, WeightDistribution, attraction_range, build_instance,
                          check_feasible, load_instance, parse_weight, reachable_facilities,
                          shopping_range)


def test_parse_weight_forms():
    assert parse_weight(3) == 3
    assert parse_weight("7/4") == F(7, 4)
    assert parse_weight("0.1") == F(1, 10)
    assert parse_weight(0.1) == F(1, 10)
    for bad in (True, "abc", "1/0", None):
        with pytest.raises(InstanceError):
            parse_weight(bad)


def test_ranges_on_path():
    inst = gen_gstar()
    assert shopping_range(inst, "v2") == {"v2", "v3"}
    assert shopping_range(inst, "v4") == {"v4"}
    assert reachable_facilities(inst, ("v2", "v3"), "v2") == {0, 1}
    assert reachable_facilities(inst, ("v2", "v3"), "v4") == set()
    assert attraction_range(inst, ("v2", "v3"), 1) == {"v2", "v3"}
    with pytest.raises(InstanceError):
        attraction_range(inst, ("v2", "v3"), 2)


def test_undirected_expands_both_ways():
    inst = build_instance([("a", 1), ("b", 2)], [("a", "b")], 1, directed=False)
    assert inst.edges == {("a", "b"), ("b", "a")}


@pytest.mark.parametrize("doc, fragment", [
    ("{", "malformed JSON"),
    ('{"nodes": [], "facilities": 1}', "no nodes"),
    ('{"nodes": [{"id": "a", "weight": 1}, {"id": "a", "weight": 2}], "facilities": 1}', "duplicate"),
    ('{"nodes": [{"id": "a", "weight": 1}], "edges": [["a", "zz"]], "facilities": 1}', "zz"),
    ('{"nodes": [{"id": "a", "weight": 1}], "edges": [["a", "a"]], "facilities": 1}', "self-loop"),
    ('{"nodes": [{"id": "a", "weight": -1}], "facilities": 1}', "negative"),
    ('{"nodes": [{"id": "a", "weight": 1}], "facilities": 0}', "facility count"),
    ('{"nodes": [{"id": "a", "weight": 1}]}', "facilities"),
    ('{"nodes": [{"id": "a", "weight": 1}], "edges": ["ab"], "facilities": 1}', "edge"),
])
def test_load_instance_rejects(doc, fragment):
    with pytest.raises(InstanceError, match=fragment):
        load_instance(doc)


def test_placement_length_checked():
    inst = gen_gstar()
    with pytest.raises(InstanceError):
        inst.check_placement(("v1",))
    with pytest.raises(InstanceError):
        inst.check_placement(("v1", "nowhere"))


def test_feasibility_check():
    inst = gen_gstar()
    good = WeightDistribution({("v1", 0): F(3), ("v2", 0): F(2), ("v3", 1): F(7)})
    check_feasible(inst, ("v2", "v3"), good)
    with pytest.raises(InstanceError):
        check_feasible(inst, ("v2", "v3"), WeightDistribution({("v1", 1): F(3)}))
    with pytest.raises(InstanceError):
        check_feasible(inst, ("v2", "v3"), WeightDistribution({("v1", 0): F(1)}))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.floats(0, 1), st.integers(1, 4), st.integers(0, 10**6))
def test_json_round_trip(n, p, k, seed):
    inst = gen_random(n, p, (0, 5), k, seed)
    again = load_instance(inst.to_json())
    assert again == inst
    assert json.loads(again.to_json()) == json.loads(inst.to_json())
