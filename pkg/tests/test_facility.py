from fractions import Fraction as F

import pytest

from cases import random_case
from flg.facility import (LoadOracle, PlacementBudgetExceeded, SolverConfig, check_stability,
                          compute_approx_spe, evaluate_deviation, find_spe, remove_facility, solve)
from flg.generators import gen_fig1, gen_gstar, gen_lowerbound, lowerbound_spe_placement
from flg.instance import build_instance


def test_evaluate_deviation_examples():
    inst = gen_gstar()
    assert evaluate_deviation(inst, ("v2", "v3"), 1, "v4")[1] == 8
    assert evaluate_deviation(inst, ("v2", "v4"), 0, "v3")[1] == F(21, 4)
    assert evaluate_deviation(inst, ("v2", "v3"), 0, "v2")[1] == 5


def test_check_stability_examples():
    inst = gen_gstar()
    rep = check_stability(inst, ("v3", "v4"), 1)
    assert rep.verdict == "not-SPE" and rep.stable is False
    assert rep.per_facility[1]["target"] == "v2" and rep.per_facility[1]["payoff"] == 5
    assert rep.loads[1] == F(19, 4)


def test_gstar_colocated_best_deviation():
    # the best move out of (v3, v3) goes to v2 and pays 5
    rep = check_stability(gen_gstar(), ("v3", "v3"), F(6, 5))
    assert rep.verdict == "alpha-SPE"
    assert rep.per_facility[0]["target"] == "v2"
    assert rep.max_gain_ratio == F(10, 9)
    assert check_stability(gen_gstar(), ("v3", "v3"), F(11, 10)).verdict == "not-alpha-SPE"


def test_single_facility_at_coverage_max():
    inst = gen_gstar().with_k(1)
    assert check_stability(inst, ("v3",), 1).verdict == "SPE"
    best = max(range(inst.n), key=lambda v: (inst.cover(v), -v))
    assert find_spe(inst) == (inst.ids[best],)


def test_zero_payoff_facility_is_violated():
    inst = build_instance([("a", 1), ("b", 0)], [], 1)
    rep = check_stability(inst, ("b",), 100)
    assert rep.stable is False and rep.per_facility[0]["ratio"] == float("inf")


def test_fig1_left_find_spe_matches_brute_force():
    inst = gen_fig1("left")
    brute = [p for p in [("v0", "v0"), ("v0", "v1"), ("v0", "v2"), ("v0", "v3"), ("v1", "v1"),
                         ("v1", "v2"), ("v1", "v3"), ("v2", "v2"), ("v2", "v3"), ("v3", "v3")]
             if check_stability(inst, p, 1).stable]
    hit = find_spe(inst)
    assert (hit is None) == (not brute)
    if brute:
        assert hit == brute[0]


def test_find_spe_budget():
    with pytest.raises(PlacementBudgetExceeded):
        find_spe(gen_gstar(), budget=5)


def test_remove_facility_examples():
    reduced, rep = remove_facility(gen_fig1("left"), ("v0", "v2"), 1)
    assert reduced == ("v0",) and rep.loads == [2]
    assert rep.sigma.of("v3") == {}
    _, rep = remove_facility(gen_gstar(), ("v2", "v3"), 0)
    assert rep.loads == [9]
    # a facility that attracts nobody leaves the others untouched
    inst = build_instance([("a", 1), ("b", 2), ("z", 0)], [("a", "b")], 3)
    before = solve(inst, ("a", "b", "z")).loads
    assert remove_facility(inst, ("a", "b", "z"), 2)[1].loads == before[:2]


def test_approx_pipeline_examples():
    t = 3
    placement, rep, trace = compute_approx_spe(gen_lowerbound(t), F(1, 10), lowerbound_spe_placement(t))
    assert placement == lowerbound_spe_placement(t) and trace.step_count == 0
    assert rep.max_gain_ratio == F(9, 7)
    placement, rep, _ = compute_approx_spe(gen_gstar(), F(1, 10), ("v1", "v1"))
    assert rep.alpha == F(16, 5) and rep.stable


def test_iterative_config_agrees():
    inst = gen_gstar()
    cfg = SolverConfig(method="iterative", tol=1e-12)
    exact = check_stability(inst, ("v2", "v3"), 1)
    approx = check_stability(inst, ("v2", "v3"), 1, cfg)
    assert approx.verdict == exact.verdict
    assert not approx.exact


def test_oracle_reuses_components():
    inst, placement, _ = random_case(7, n_max=10, k_max=3)
    oracle = LoadOracle(inst)
    check_stability(inst, placement, 1, oracle=oracle)
    first = oracle.solves
    check_stability(inst, placement, 1, oracle=oracle)
    assert oracle.solves == first


@pytest.mark.parametrize("seed", range(5))
def test_parallel_matches_serial(seed):
    inst, placement, _ = random_case(900 + seed, n_max=6, k_max=2)
    serial = check_stability(inst, placement, 1)
    parallel = check_stability(inst, placement, 1, SolverConfig(jobs=2))
    assert serial.table == parallel.table
    assert find_spe(inst) == find_spe(inst, config=SolverConfig(jobs=2))
