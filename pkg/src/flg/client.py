"""Client equilibria of the waiting-time minimizing game for a fixed placement.

Client ``i`` chooses a split ``x_i`` of its weight over reachable
facilities to minimize ``sum_j x_ij * load_j``.  Two solvers are provided:

* ``solve_iterative``: Gauss-Seidel sweeps of the closed-form water-filling
  best response, in floating point.
* ``solve_exact``: guesses the support (which client/facility pairs carry
  weight), solves the resulting linear system in exact rationals and
  accepts the pattern only if it satisfies the equilibrium conditions.
  Candidate patterns come from a floating point warm start, a
  primal-dual active-set repair loop, and finally exhaustive enumeration.

The client stage is a potential game: the gradient of
``0.5 * sum_j load_j**2 + 0.5 * sum_ij x_ij**2`` in ``x_ij`` is exactly the
marginal cost ``load_j + x_ij``.  Sequential best responses are therefore
block coordinate descent on a strictly convex quadratic and converge.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .instance import (Instance, InstanceError, WeightDistribution, check_feasible,
                       facility_reach, format_number)
from .linalg import solve_sparse

DEFAULT_TOL = 1e-12
DEFAULT_ACTIVITY_TOL = 1e-10
DEFAULT_SUPPORT_BUDGET = 2 * 10**6
DEFAULT_MAX_ROUNDS = 10**6
REPAIR_STEPS = 200


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):
    """Iterative solver hit ``max_rounds``; carries the last iterate's report."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class SupportBudgetExceeded(SolverError):
    pass


class StrandedClient(ValueError):
    """A client with positive weight has no facility to distribute it to."""


@dataclass
class EquilibriumReport:
    sigma: WeightDistribution
    loads: list
    residual: float
    method: str
    iterations: int
    lambdas: dict = field(default_factory=dict)
    placement: tuple = ()

    @property
    def exact(self) -> bool:
        return self.method == "exact"

    def to_dict(self, inst: Instance, decimal: bool = False) -> dict:
        return {
            "method": self.method,
            "placement": list(self.placement),
            "loads": {str(j): format_number(x, decimal) for j, x in enumerate(self.loads)},
            "sigma": self.sigma.to_list(inst, decimal),
            "lambda": {i: format_number(x, decimal) for i, x in self.lambdas.items()},
            "residual": float(self.residual),
            "iterations": self.iterations,
        }


def best_response(w, offloads: Sequence) -> list:
    """Unique minimizer of ``sum_j x_j * (x_j + offloads_j)`` over ``x >= 0, sum x = w``.

    Water-filling: ``x_j = max(0, (lam - offloads_j) / 2)`` with ``lam`` set so
    the split sums to ``w``.  Works for floats and Fractions alike.
    """
    m = len(offloads)
    if m == 0:
        if w > 0:
            raise StrandedClient("no reachable facility")
        return []
    if w == 0:
        return [w * 0] * m
    order = sorted(range(m), key=offloads.__getitem__)
    total = 2 * w
    lam = None
    for count, j in enumerate(order, start=1):
        total += offloads[j]
        lam = total / count
        if count == m or lam <= offloads[order[count]]:
            break
    return [(lam - o) / 2 if o < lam else o * 0 for o in offloads]


def water_level(w, offloads: Sequence):
    """The common marginal cost ``lam`` of a best response."""
    x = best_response(w, offloads)
    return min(o + 2 * xi for o, xi in zip(offloads, x)) if w > 0 else min(offloads)


# ---------------------------------------------------------------------------
# shared helpers over the internal (per-node list) representation

def _loads(reach, x, k):
    loads = [0] * k
    for fac, split in zip(reach, x):
        for j, v in zip(fac, split):
            loads[j] += v
    return loads


def _residual(reach, x, loads, activity_tol) -> float:
    worst = 0
    for fac, split in zip(reach, x):
        if len(fac) < 2:
            continue
        marg = [loads[j] + v for j, v in zip(fac, split)]
        lo = min(marg)
        for v, m in zip(split, marg):
            if v > activity_tol and m - lo > worst:
                worst = m - lo
    return worst


def _distribution(inst, reach, x) -> WeightDistribution:
    entries = {}
    for i, (fac, split) in enumerate(zip(reach, x)):
        for j, v in zip(fac, split):
            if v > 0:
                entries[inst.ids[i], j] = v
    return WeightDistribution(entries)


def _unpack(inst: Instance, placement: Sequence[str], sigma: WeightDistribution):
    locs = inst.locate(placement)
    reach = facility_reach(inst, locs)
    x = [[0] * len(fac) for fac in reach]
    for (client, j), v in sigma.entries.items():
        i = inst.node(client)
        x[i][reach[i].index(j)] = v
    return reach, x, len(locs)


def equilibrium_residual(inst: Instance, placement: Sequence[str], sigma: WeightDistribution,
                         activity_tol: float = DEFAULT_ACTIVITY_TOL, feasibility_tol: float = 1e-9):
    """Largest violation of ``load_p + x_ip <= load_q + x_iq`` over active pairs (i, p).

    Zero exactly at the client equilibrium.  Returns a Fraction when sigma is exact.
    """
    exact = all(isinstance(v, (Fraction, int)) for v in sigma.entries.values())
    check_feasible(inst, placement, sigma, tol=0 if exact else feasibility_tol)
    reach, x, k = _unpack(inst, placement, sigma)
    return _residual(reach, x, _loads(reach, x, k), activity_tol)


def client_cost(inst: Instance, placement: Sequence[str], sigma: WeightDistribution, client: str):
    """Total waiting time ``sum_j x_ij * load_j`` of one client."""
    own = sigma.of(inst.ids[inst.node(client)])
    loads = sigma.loads(len(placement))
    return sum(v * loads[j] for j, v in own.items()) if own else 0


def _lambdas(inst, reach, x, loads) -> dict:
    out = {}
    for i, (fac, split) in enumerate(zip(reach, x)):
        if fac:
            out[inst.ids[i]] = min(loads[j] + v for j, v in zip(fac, split))
    return out


# ---------------------------------------------------------------------------
# iterative solver

def uniform_start(inst: Instance, reach) -> list[list[float]]:
    return [[float(inst.weights[i]) / len(fac)] * len(fac) if fac else [] for i, fac in enumerate(reach)]


def random_start(inst: Instance, placement: Sequence[str], rng: random.Random) -> WeightDistribution:
    """A random feasible distribution (exponential spacings, i.e. uniform on each simplex)."""
    reach = facility_reach(inst, inst.locate(placement))
    entries = {}
    for i, fac in enumerate(reach):
        w = float(inst.weights[i])
        if not fac or w == 0:
            continue
        draws = [rng.expovariate(1.0) for _ in fac]
        total = sum(draws)
        for j, d in zip(fac, draws):
            entries[inst.ids[i], j] = w * d / total
    return WeightDistribution(entries)


def solve_iterative(inst: Instance, placement: Sequence[str], tol: float = DEFAULT_TOL,
                    max_rounds: int = DEFAULT_MAX_ROUNDS, damping: float = 1.0,
                    start: Optional[WeightDistribution] = None,
                    activity_tol: float = DEFAULT_ACTIVITY_TOL) -> EquilibriumReport:
    """Damped Gauss-Seidel best-response sweeps over clients in node order.

    Stops once a sweep moves no weight by more than ``tol`` and the
    equilibrium residual is at most ``1e3 * tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    locs = inst.locate(placement)
    k = len(locs)
    reach = facility_reach(inst, locs)
    weights = [float(w) for w in inst.weights]
    if start is None:
        x = uniform_start(inst, reach)
    else:
        x = [[float(v) for v in row] for row in _unpack(inst, placement, start)[1]]
    for i, fac in enumerate(reach):
        if not fac:
            x[i] = []
    active = [i for i, fac in enumerate(reach) if fac and weights[i] > 0]
    loads = _loads(reach, x, k)
    residual = math.inf
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        change = 0.0
        for i in active:
            fac = reach[i]
            old = x[i]
            if len(fac) == 1:
                new = [weights[i]]
            else:
                new = best_response(weights[i], [loads[j] - v for j, v in zip(fac, old)])
                if damping != 1.0:
                    new = [(1 - damping) * a + damping * b for a, b in zip(old, new)]
            for j, a, b in zip(fac, old, new):
                d = b - a
                if d:
                    loads[j] += d
                    if abs(d) > change:
                        change = abs(d)
            x[i] = new
        loads = _loads(reach, x, k)
        if change <= tol:
            residual = _residual(reach, x, loads, activity_tol)
            if residual <= 1e3 * tol:
                break
    else:
        residual = _residual(reach, x, loads, activity_tol)
        report = EquilibriumReport(_distribution(inst, reach, x), loads, residual, "iterative",
                                   rounds, _lambdas(inst, reach, x, loads), tuple(placement))
        raise ConvergenceError(
            f"no convergence after {max_rounds} rounds (residual {residual:.3g})", report)
    return EquilibriumReport(_distribution(inst, reach, x), loads, residual, "iterative", rounds,
                             _lambdas(inst, reach, x, loads), tuple(placement))


# ---------------------------------------------------------------------------
# exact solver

def _solve_pattern(weights, clients, support, k):
    """Loads and water levels for a support pattern, in exact rationals.

    With ``x_ij = lam_i - load_j`` on the support, eliminating ``lam`` leaves a
    system in the loads alone: ``(1 + c_j) load_j - sum_{i: j in S_i} (w_i +
    sum_{q in S_i} load_q) / |S_i| = 0``, where ``c_j`` counts the clients
    supporting ``j``.  Its matrix is the identity plus a positive
    semidefinite part, hence always nonsingular.
    """
    used = sorted({j for i in clients for j in support[i]})
    col = {j: c for c, j in enumerate(used)}
    size = len(used)
    rows = [dict() for _ in range(size)]
    rhs = [Fraction(0)] * size
    for c in range(size):
        rows[c][c] = Fraction(1)
    for i in clients:
        s = support[i]
        share = Fraction(1, len(s))
        wshare = weights[i] * share
        cols = [col[j] for j in s]
        for a in cols:
            row = rows[a]
            row[a] += 1
            for b in cols:
                row[b] = row.get(b, 0) - share
            rhs[a] += wshare
    for row in rows:
        for c in [c for c, v in row.items() if not v]:
            del row[c]
    sol = solve_sparse(rows, rhs, size)
    loads = [Fraction(0)] * k
    for j, c in col.items():
        loads[j] = sol[c]
    lam = {}
    for i in clients:
        s = support[i]
        lam[i] = (weights[i] + sum(loads[j] for j in s)) / len(s)
    return loads, lam


def _check_pattern(reach, clients, support, loads, lam):
    """Return (negative support pairs, violated non-support pairs)."""
    negative, violated = [], []
    for i in clients:
        li = lam[i]
        s = support[i]
        for j in reach[i]:
            if j in s:
                if li - loads[j] < 0:
                    negative.append((li - loads[j], i, j))
            elif loads[j] < li:
                violated.append((loads[j] - li, i, j))
    return negative, violated


def count_patterns(inst: Instance, placement: Sequence[str]) -> int:
    reach = facility_reach(inst, inst.locate(placement))
    total = 1
    for i, fac in enumerate(reach):
        if fac and inst.weights[i] > 0:
            total *= 2 ** len(fac) - 1
    return total


def _guess_support(inst, placement, reach, clients):
    try:
        rep = solve_iterative(inst, placement, tol=1e-10, max_rounds=20000)
    except ConvergenceError as exc:
        rep = exc.report
    guess = {}
    for i in clients:
        w = float(inst.weights[i])
        own = rep.sigma.of(inst.ids[i])
        s = frozenset(j for j, v in own.items() if v > 1e-7 * max(w, 1.0))
        guess[i] = s or frozenset([max(own, key=own.get)] if own else [reach[i][0]])
    return guess


def solve_exact(inst: Instance, placement: Sequence[str],
                support_budget: int = DEFAULT_SUPPORT_BUDGET,
                warm_start: bool = True) -> EquilibriumReport:
    """Exact client equilibrium by support identification and Gaussian elimination.

    Every tried support pattern counts against ``support_budget``.  With
    ``warm_start=False`` the patterns are enumerated exhaustively in
    lexicographic order and the total pattern count must fit the budget.
    """
    locs = inst.locate(placement)
    k = len(locs)
    reach = facility_reach(inst, locs)
    weights = inst.weights
    clients = [i for i, fac in enumerate(reach) if fac and weights[i] > 0]
    if not warm_start and count_patterns(inst, placement) > support_budget:
        raise SupportBudgetExceeded(
            f"{count_patterns(inst, placement)} support patterns exceed the budget {support_budget}")
    memo = {}

    def evaluate(support):
        key = tuple(support[i] for i in clients)
        if key not in memo:
            if len(memo) >= support_budget:
                raise SupportBudgetExceeded(f"tried {len(memo)} support patterns without success")
            loads, lam = _solve_pattern(weights, clients, support, k)
            memo[key] = loads, lam, _check_pattern(reach, clients, support, loads, lam)
        return memo[key]

    found = None
    if warm_start and clients:
        support = _guess_support(inst, placement, reach, clients)
        seen = set()
        single = False
        for _ in range(REPAIR_STEPS):
            key = tuple(support[i] for i in clients)
            if key in seen:
                if single:
                    break
                # simultaneous flips cycled: continue with one flip per step
                single = True
            seen.add(key)
            loads, lam, (negative, violated) = evaluate(support)
            if not negative and not violated:
                found = support, loads, lam
                break
            flips = [min(negative + violated)] if single else negative + violated
            support = dict(support)
            for _, i, j in flips:
                support[i] = support[i] ^ {j}
    if found is None and clients:
        options = []
        for i in clients:
            fac = reach[i]
            options.append([frozenset(c) for r in range(len(fac), 0, -1)
                            for c in itertools.combinations(fac, r)])
        for combo in itertools.product(*options):
            support = dict(zip(clients, combo))
            loads, lam, (negative, violated) = evaluate(support)
            if not negative and not violated:
                found = support, loads, lam
                break
        else:
            raise SolverError("no support pattern satisfies the equilibrium conditions; "
                              "this contradicts uniqueness and indicates a bug")
    if found is None:
        support, loads, lam = {}, [Fraction(0)] * k, {}
    else:
        support, loads, lam = found
    x = []
    for i, fac in enumerate(reach):
        if i in support:
            x.append([lam[i] - loads[j] if j in support[i] else Fraction(0) for j in fac])
        else:
            x.append([Fraction(0)] * len(fac))
    loads = _loads(reach, x, k)
    loads = [Fraction(v) for v in loads]
    residual = _residual(reach, x, loads, 0)
    return EquilibriumReport(_distribution(inst, reach, x), loads, residual, "exact", len(memo),
                             _lambdas(inst, reach, x, loads), tuple(placement))
