import json
import random
from fractions import Fraction as F

import networkx as nx
import pytest

from flg.generators import (cut_value, gen_fig1, gen_gstar, gen_is_reduction, gen_lowerbound,
                            gen_maxcut_reduction, gen_random, has_independent_set, is_local_max_cut,
                            load_graph, lowerbound_spe_placement)
from flg.uniform import improve_to_equilibrium, is_uniform_equilibrium, uniform_loads


def test_fixed_families():
    g = gen_gstar()
    assert g.ids == ("v1", "v2", "v3", "v4") and g.weights == (3, 2, 7, 1) and g.k == 2
    assert gen_fig1("left").n == 4 and gen_fig1("right").n == 5
    with pytest.raises(ValueError):
        gen_fig1("middle")


@pytest.mark.parametrize("t", [2, 3, 4])
def test_lowerbound_shape(t):
    inst = gen_lowerbound(t)
    assert inst.n == 2 + t + t * t and inst.k == t * t + 1
    assert len(lowerbound_spe_placement(t)) == inst.k
    assert inst.weight("y1_1") == F(2 * t - 2, t)
    with pytest.raises(ValueError):
        gen_lowerbound(1)


def test_is_reduction_shape():
    g = nx.path_graph(3)
    inst, mapping = gen_is_reduction(g, 2)
    # 3 vertices, 2 edge nodes, 2 + 1 + 2 padding nodes, 2 gadget copies of 4
    assert inst.n == 3 + 2 + 5 + 8 and inst.k == 4
    assert mapping["padding"]["1"] == ["y[1]"]
    assert all(inst.weight(x) == F(7, 4) for x in mapping["edges"].values())
    assert gen_is_reduction(nx.empty_graph(1), 1)[0].n == 1 + 3 + 4
    with pytest.raises(ValueError):
        gen_is_reduction(nx.star_graph(4), 1)
    with pytest.raises(ValueError):
        gen_is_reduction(g, 0)


def test_independent_set_brute_force():
    assert has_independent_set(nx.path_graph(3), 2)
    assert not has_independent_set(nx.complete_graph(3), 2)


def test_maxcut_single_edge():
    g = nx.Graph()
    g.add_edge("u", "v", weight=1)
    inst, decode, mapping = gen_maxcut_reduction(g)
    assert inst.n == 12 and inst.k == 2 and mapping["M"] == "3"
    eq = ("left[u]", "right[v]")
    assert is_uniform_equilibrium(inst, eq)
    assert decode(eq) == {"u"}
    loads = uniform_loads(inst, eq)
    # 2M from the gadget plus the full weight of the cut edge
    assert loads == [7, 7]


def test_crossed_wiring_rewards_uncut_edges():
    g = nx.Graph()
    g.add_edge("u", "v", weight=1)
    inst, decode, _ = gen_maxcut_reduction(g, wiring="crossed")
    same = ("left[u]", "left[v]")
    assert is_uniform_equilibrium(inst, same)
    assert not is_local_max_cut(g, decode(same))


@pytest.mark.parametrize("seed", range(6))
def test_maxcut_equilibria_decode_to_local_max(seed):
    rng = random.Random(seed)
    g = nx.gnm_random_graph(5, 5, seed=seed)
    for u, v in g.edges:
        g[u][v]["weight"] = rng.randint(1, 4)
    inst, decode, _ = gen_maxcut_reduction(g)
    for _ in range(3):
        eq = improve_to_equilibrium(inst, tuple(rng.choice(inst.ids) for _ in range(inst.k)))
        side = decode(eq)
        assert is_local_max_cut(g, side)
        # one facility per gadget, on its left or right node
        assert sorted(p.split("[")[1] for p in eq) == sorted(f"{v}]" for v in g.nodes)


def test_cut_value():
    g = nx.Graph()
    g.add_weighted_edges_from([(0, 1, 2), (1, 2, 3)])
    assert cut_value(g, frozenset({1})) == 5
    assert is_local_max_cut(g, frozenset({1}))
    assert not is_local_max_cut(g, frozenset())


def test_random_is_reproducible():
    a = gen_random(8, 0.3, (0, 5), 3, seed=11)
    assert a == gen_random(8, 0.3, (0, 5), 3, seed=11)
    assert all(0 <= w <= 5 for w in a.weights)
    with pytest.raises(ValueError):
        gen_random(3, 1.5)


def test_load_graph():
    g = load_graph(json.dumps({"nodes": ["a"], "edges": [["b", "c", "3/2"], ["c", "d"]]}))
    assert set(g.nodes) == {"a", "b", "c", "d"} and g["b"]["c"]["weight"] == F(3, 2)
    with pytest.raises(ValueError):
        load_graph('{"edges": [["a", "a"]]}')
