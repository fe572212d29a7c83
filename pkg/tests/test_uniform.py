import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cases import random_case
from flg.generators import gen_gstar, gen_lowerbound, lowerbound_spe_placement
from flg.instance import build_instance
from flg.uniform import (DynamicsLimitExceeded, improve_to_equilibrium, is_uniform_equilibrium, potential,
                         run_dynamics, step_ceiling, uniform_best_deviation, uniform_distribution,
                         uniform_loads)


def _harmonic_potential(inst, placement):
    """Independent evaluation: sum over nodes of w / 1 + w / 2 + ... per covering facility."""
    total = F(0)
    for v, w in zip(inst.ids, inst.weights):
        count = sum(1 for p in placement if p in {v} | {b for a, b in inst.edges if a == v})
        for j in range(1, count + 1):
            total += F(w) / j
    return total


def test_uniform_loads_gstar():
    inst = gen_gstar()
    assert uniform_loads(inst, ("v2", "v3")) == [4, 8]
    sigma = uniform_distribution(inst, ("v2", "v3"))
    assert sigma.of("v2") == {0: 1, 1: 1}
    assert uniform_loads(inst.with_k(1), ("v2",)) == [5]


@pytest.mark.parametrize("t", [2, 3, 5])
def test_uniform_loads_lowerbound(t):
    inst = gen_lowerbound(t)
    loads = uniform_loads(inst, lowerbound_spe_placement(t))
    assert loads[0] == 1
    assert all(x == F(2 * t - 2, t) + F(1, t) for x in loads[1:])


def test_potential_examples():
    inst = gen_gstar()
    assert potential(inst, ("v2", "v3")) == 13 == _harmonic_potential(inst, ("v2", "v3"))
    zero = build_instance([("a", 0), ("b", 0)], [("a", "b")], 2)
    assert potential(zero, ("a", "b")) == 0
    single = build_instance([("c", 2), ("p", 0), ("q", 0)], [("c", "p"), ("c", "q")], 2)
    assert potential(single, ("p", "q")) == 3


def test_best_deviation_examples():
    inst = gen_lowerbound(3)
    assert uniform_best_deviation(inst, lowerbound_spe_placement(3), 0, 0.01) is None
    assert uniform_best_deviation(gen_gstar(), ("v3", "v3"), 1, 0) is not None
    # k = 1 at the coverage maximum (v2 is reached by weight 3 + 2)
    assert uniform_best_deviation(gen_gstar().with_k(1), ("v3",), 0, 0) is None


def test_dynamics_gstar():
    inst = gen_gstar()
    trace = run_dynamics(inst, ("v1", "v1"), F(1, 20))
    assert trace.step_count > 0
    for j in range(2):
        assert uniform_best_deviation(inst, trace.final_placement, j, F(1, 20)) is None
    for step in trace.steps:
        assert step.new_payoff >= F(21, 20) * step.old_payoff
        assert step.potential_after - step.potential_before == step.new_payoff - step.old_payoff > 0
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == trace.step_count
    assert set(json.loads(lines[0])) >= {"facility", "source", "target", "old_payoff", "new_payoff"}


def test_dynamics_at_equilibrium_is_idle():
    placement = lowerbound_spe_placement(2)
    assert run_dynamics(gen_lowerbound(2), placement, F(1, 10)).step_count == 0
    assert run_dynamics(gen_gstar(), ("v3", "v3"), 10).step_count == 0


def test_dynamics_limit():
    with pytest.raises(DynamicsLimitExceeded) as info:
        run_dynamics(gen_gstar(), ("v1", "v1"), F(1, 20), max_steps=0)
    assert info.value.trace.step_count == 0
    with pytest.raises(ValueError):
        run_dynamics(gen_gstar(), ("v1", "v1"), 0)


def test_step_ceiling_monotone():
    assert step_ceiling(4, 0.5) < step_ceiling(4, 0.05) < step_ceiling(8, 0.05)


def test_strict_dynamics_reaches_exact_equilibrium():
    inst = gen_gstar()
    final = improve_to_equilibrium(inst, ("v1", "v1"))
    assert is_uniform_equilibrium(inst, final)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_potential_exactness(seed, data):
    inst, placement, _ = random_case(seed, n_max=10, k_max=4)
    j = data.draw(st.integers(0, len(placement) - 1))
    target = data.draw(st.sampled_from(inst.ids))
    moved = placement[:j] + (target,) + placement[j + 1:]
    gain = uniform_loads(inst, moved)[j] - uniform_loads(inst, placement)[j]
    assert potential(inst, moved) - potential(inst, placement) == gain
    assert potential(inst, placement) == _harmonic_potential(inst, placement)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_uniform_conservation(seed):
    inst, placement, _ = random_case(seed, n_max=10, k_max=4)
    covered = {v for loc in inst.locate(placement) for v in inst.attract[loc]}
    assert sum(uniform_loads(inst, placement)) == sum(inst.weights[v] for v in covered)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([F(1, 20), F(1, 2), F(2)]))
def test_dynamics_invariants(seed, eps):
    inst, placement, _ = random_case(seed, n_max=10, k_max=4)
    trace = run_dynamics(inst, placement, eps)
    assert trace.step_count <= step_ceiling(max(inst.n, inst.k), eps)
    assert is_uniform_equilibrium(inst, trace.final_placement, eps)
    for step in trace.steps:
        assert step.potential_after > step.potential_before
        assert step.new_payoff >= (1 + eps) * step.old_payoff
