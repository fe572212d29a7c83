"""The uniform-split proxy game and its approximate best-response dynamics.

Under the uniform rule every client splits its weight equally over the
facilities in range, so facility payoffs depend only on how many
facilities cover each node.  The potential
``sum_v w(v) * H(number of facilities in range of v)`` changes by exactly
the mover's payoff difference under any unilateral relocation.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .instance import Instance, WeightDistribution, as_fraction, facility_reach, format_number


class DynamicsLimitExceeded(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass
class Step:
    facility: int
    source: str
    target: str
    old_payoff: Fraction
    new_payoff: Fraction
    potential_before: Fraction
    potential_after: Fraction

    def to_json(self) -> str:
        return json.dumps({k: v if isinstance(v, (int, str)) else str(v) for k, v in asdict(self).items()})


@dataclass
class DynamicsTrace:
    start: tuple
    epsilon: Fraction
    steps: list = field(default_factory=list)
    final_placement: tuple = ()

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def to_jsonl(self) -> str:
        return "".join(step.to_json() + "\n" for step in self.steps)


def coverage_counts(inst: Instance, locs: Sequence[int]) -> list[int]:
    """Number of facilities within the shopping range of each node."""
    counts = [0] * inst.n
    for loc in locs:
        for v in inst.attract[loc]:
            counts[v] += 1
    return counts


def uniform_distribution(inst: Instance, placement: Sequence[str]) -> WeightDistribution:
    reach = facility_reach(inst, inst.locate(placement))
    entries = {}
    for i, fac in enumerate(reach):
        if fac and inst.weights[i] > 0:
            share = inst.weights[i] / len(fac)
            for j in fac:
                entries[inst.ids[i], j] = share
    return WeightDistribution(entries)


def _loads(inst: Instance, locs: Sequence[int]) -> list[Fraction]:
    counts = coverage_counts(inst, locs)
    w = inst.weights
    return [sum((w[v] / counts[v] for v in inst.attract[loc]), Fraction(0)) for loc in locs]


def uniform_loads(inst: Instance, placement: Sequence[str]) -> list[Fraction]:
    return _loads(inst, inst.locate(placement))


def potential(inst: Instance, placement: Sequence[str]) -> Fraction:
    return _potential(inst, coverage_counts(inst, inst.locate(placement)))


def _potential(inst: Instance, counts: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for w, c in zip(inst.weights, counts):
        if w and c:
            total += w * sum(Fraction(1, j) for j in range(1, c + 1))
    return total


def _payoffs_after_leaving(inst: Instance, counts: list[int], loc: int) -> list[Fraction]:
    """Payoff at every target for a facility that leaves ``loc``."""
    for v in inst.attract[loc]:
        counts[v] -= 1
    w = inst.weights
    out = [sum((w[v] / (counts[v] + 1) for v in inst.attract[t] if w[v]), Fraction(0))
           for t in range(inst.n)]
    for v in inst.attract[loc]:
        counts[v] += 1
    return out


def deviation_payoff(inst: Instance, placement: Sequence[str], j: int, target: str) -> Fraction:
    locs = list(inst.locate(placement))
    locs[j] = inst.node(target)
    return _loads(inst, locs)[j]


def _meets(new: Fraction, old: Fraction, factor: Fraction) -> bool:
    if old == 0:
        return new > 0
    return new >= factor * old


def _best_deviation(inst, locs, counts, j, factor):
    old = _loads_one(inst, counts, locs[j])
    payoffs = _payoffs_after_leaving(inst, counts, locs[j])
    best = None
    for t, p in enumerate(payoffs):
        if t == locs[j]:
            continue
        if best is None or p > payoffs[best]:
            best = t
    if best is not None and _meets(payoffs[best], old, factor):
        return best, payoffs[best], old
    return None


def _loads_one(inst, counts, loc) -> Fraction:
    w = inst.weights
    return sum((w[v] / counts[v] for v in inst.attract[loc] if w[v]), Fraction(0))


def uniform_best_deviation(inst: Instance, placement: Sequence[str], j: int,
                           epsilon=0) -> Optional[tuple[str, Fraction]]:
    """Best relocation of facility ``j`` if it pays at least ``(1 + epsilon)`` times the current payoff.

    A facility with payoff 0 accepts any move with positive payoff.  Ties go
    to the earliest node in instance order.
    """
    eps = as_fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    locs = list(inst.locate(placement))
    hit = _best_deviation(inst, locs, coverage_counts(inst, locs), j, 1 + eps)
    return None if hit is None else (inst.ids[hit[0]], hit[1])


def is_uniform_equilibrium(inst: Instance, placement: Sequence[str], epsilon=0) -> bool:
    """True when no facility can get strictly more than ``(1 + epsilon)`` times its payoff."""
    factor = 1 + as_fraction(epsilon)
    locs = list(inst.locate(placement))
    counts = coverage_counts(inst, locs)
    for loc in locs:
        old = _loads_one(inst, counts, loc)
        if max(_payoffs_after_leaving(inst, counts, loc)) > factor * old:
            return False
    return True


def step_ceiling(n: int, epsilon) -> int:
    """Step budget ``(1 + 1/eps) * n^2 * (ln n + 1)`` for the approximate dynamics.

    ``n`` is the larger of node and facility count.
    """
    eps = float(epsilon)
    n = max(n, 2)
    return math.ceil((1 + 1 / eps) * n * n * (math.log(n) + 1))


def run_dynamics(inst: Instance, start: Sequence[str], epsilon, max_steps: Optional[int] = None) -> DynamicsTrace:
    """Approximate best-response dynamics under uniform payoffs.

    Facilities are scanned in index order and the first one with a move
    worth at least ``(1 + epsilon)`` times its payoff relocates to its best
    target.  Stops when a full scan finds no such move.
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if max_steps is None:
        max_steps = step_ceiling(max(inst.n, len(start)), eps)
    locs = list(inst.locate(start))
    counts = coverage_counts(inst, locs)
    trace = DynamicsTrace(tuple(start), eps)
    phi = _potential(inst, counts)
    factor = 1 + eps
    while True:
        for j in range(len(locs)):
            hit = _best_deviation(inst, locs, counts, j, factor)
            if hit is not None:
                break
        else:
            break
        if trace.step_count >= max_steps:
            trace.final_placement = inst.names(locs)
            raise DynamicsLimitExceeded(f"dynamics exceeded {max_steps} steps", trace)
        target, new, old = hit
        source = locs[j]
        for v in inst.attract[source]:
            counts[v] -= 1
        for v in inst.attract[target]:
            counts[v] += 1
        locs[j] = target
        after = _potential(inst, counts)
        trace.steps.append(Step(j, inst.ids[source], inst.ids[target], old, new, phi, after))
        phi = after
    trace.final_placement = inst.names(locs)
    return trace


def trace_summary(trace: DynamicsTrace, decimal: bool = False) -> dict:
    return {
        "start": list(trace.start),
        "epsilon": str(trace.epsilon),
        "steps": trace.step_count,
        "final_placement": list(trace.final_placement),
        "potential_increase": format_number(
            sum((s.potential_after - s.potential_before for s in trace.steps), Fraction(0)), decimal),
    }


def improve_to_equilibrium(inst: Instance, start: Sequence[str], max_steps: int = 10**6) -> tuple[str, ...]:
    """Strict best-response dynamics to an exact uniform-game equilibrium.

    Terminates because the potential rises by the mover's gain each step.
    """
    locs = list(inst.locate(start))
    counts = coverage_counts(inst, locs)
    for _ in range(max_steps):
        for j in range(len(locs)):
            old = _loads_one(inst, counts, locs[j])
            payoffs = _payoffs_after_leaving(inst, counts, locs[j])
            best = max(range(inst.n), key=lambda t: (payoffs[t], -t))
            if payoffs[best] > old:
                for v in inst.attract[locs[j]]:
                    counts[v] -= 1
                for v in inst.attract[best]:
                    counts[v] += 1
                locs[j] = best
                break
        else:
            return inst.names(locs)
    raise RuntimeError(f"no equilibrium within {max_steps} steps")
