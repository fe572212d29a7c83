"""Facility stage of the waiting-time game: deviations, stability checks and SPE search.

Every facility payoff is evaluated with clients re-equilibrated for the
new placement.  Loads depend only on the multiset of occupied nodes, and
clients never cross connected components of the host graph, so the
``LoadOracle`` caches equilibria per (component shape, local multiset).
"""
from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .client import (DEFAULT_ACTIVITY_TOL, DEFAULT_MAX_ROUNDS, DEFAULT_SUPPORT_BUDGET,
                     DEFAULT_TOL, EquilibriumReport, SupportBudgetExceeded, solve_exact,
                     solve_iterative)
from .instance import Instance, InstanceError, as_fraction, format_number
from .uniform import run_dynamics

log = logging.getLogger(__name__)


def _env_tol() -> float:
    raw = os.environ.get("FLG_DEFAULT_TOL")
    return float(raw) if raw else DEFAULT_TOL


@dataclass(frozen=True)
class SolverConfig:
    """How client equilibria are computed for the facility stage.

    ``method="auto"`` solves exactly and falls back to the iterative solver
    when the support budget runs out.  Inexact ratio comparisons within
    ``margin`` (relative) of the threshold are reported as inconclusive.
    """

    method: str = "auto"
    tol: float = field(default_factory=_env_tol)
    max_rounds: int = DEFAULT_MAX_ROUNDS
    damping: float = 1.0
    activity_tol: float = DEFAULT_ACTIVITY_TOL
    support_budget: int = DEFAULT_SUPPORT_BUDGET
    margin: float = 1e-6
    jobs: int = 1

    def __post_init__(self):
        if self.method not in ("auto", "exact", "iterative"):
            raise ValueError(f"unknown solver method {self.method!r}")


class PlacementBudgetExceeded(RuntimeError):
    pass


class ApproximationViolation(RuntimeError):
    """A placement from the uniform dynamics failed the (3 + 2 eps) check."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def solve(inst: Instance, placement: Sequence[str], config: SolverConfig = SolverConfig()) -> EquilibriumReport:
    if config.method != "iterative":
        try:
            return solve_exact(inst, placement, support_budget=config.support_budget)
        except SupportBudgetExceeded:
            if config.method == "exact":
                raise
            log.info("support budget exhausted for %s; using the iterative solver", placement)
    return solve_iterative(inst, placement, tol=config.tol, max_rounds=config.max_rounds,
                           damping=config.damping, activity_tol=config.activity_tol)


def components(inst: Instance) -> list[list[int]]:
    """Weakly connected components, each sorted, ordered by smallest node."""
    parent = list(range(inst.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in inst.edges:
        a, b = find(inst.index[u]), find(inst.index[v])
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for v in range(inst.n):
        groups.setdefault(find(v), []).append(v)
    return [groups[r] for r in sorted(groups)]


class LoadOracle:
    """Per-facility equilibrium load at each occupied node, for any multiset of nodes."""

    def __init__(self, inst: Instance, config: SolverConfig = SolverConfig()):
        self.inst = inst
        self.config = config
        self.comp_of = [0] * inst.n
        self.local = [0] * inst.n
        self.subs = []
        self.shapes = []
        for c, members in enumerate(components(inst)):
            pos = {v: a for a, v in enumerate(members)}
            for v in members:
                self.comp_of[v] = c
                self.local[v] = pos[v]
            ids = tuple(inst.ids[v] for v in members)
            keep = {inst.ids[v] for v in members}
            edges = frozenset(e for e in inst.edges if e[0] in keep)
            sub = Instance(ids, tuple(inst.weights[v] for v in members), edges, 1)
            self.subs.append((members, sub))
            shape = (sub.weights, tuple(sorted((pos[inst.index[u]], pos[inst.index[v]]) for u, v in edges)))
            self.shapes.append(shape)
        self.cache: dict = {}
        self.exact_only = True
        self.solves = 0

    def _component(self, c: int, local_locs: tuple) -> tuple[tuple, bool]:
        key = (self.shapes[c], local_locs)
        hit = self.cache.get(key)
        if hit is None:
            members, sub = self.subs[c]
            rep = solve(sub, tuple(sub.ids[a] for a in local_locs), self.config)
            self.solves += 1
            per_loc = {}
            for a, load in zip(local_locs, rep.loads):
                per_loc.setdefault(a, load)
            hit = (tuple(sorted(per_loc.items())), rep.exact)
            self.cache[key] = hit
            if not rep.exact:
                self.exact_only = False
        return hit

    def loads_at(self, locs: Sequence[int]) -> tuple[dict, bool]:
        """Map occupied node -> load of each facility there, plus an all-exact flag."""
        by_comp: dict[int, list[int]] = {}
        for v in locs:
            by_comp.setdefault(self.comp_of[v], []).append(self.local[v])
        out = {}
        exact = True
        for c, local_locs in by_comp.items():
            per_loc, ok = self._component(c, tuple(sorted(local_locs)))
            exact &= ok
            members = self.subs[c][0]
            for a, load in per_loc:
                out[members[a]] = load
        return out, exact

    def payoffs(self, locs: Sequence[int]) -> tuple[list, bool]:
        at, exact = self.loads_at(locs)
        return [at[v] for v in locs], exact

    def deviation(self, locs: Sequence[int], j: int, target: int) -> tuple:
        moved = list(locs)
        moved[j] = target
        at, exact = self.loads_at(moved)
        return at[target], exact


def _compare(payoff, current, alpha: Fraction, exact: bool, margin: float) -> Optional[bool]:
    """True if the deviation breaks alpha-stability, None if inconclusive."""
    if exact:
        return payoff > alpha * current
    p, c, a = float(payoff), float(current), float(alpha)
    if c <= 0:
        if p <= margin:
            return None if p > 0 else False
        return True
    ratio = p / c
    if abs(ratio - a) <= margin * a:
        return None
    return ratio > a


def _ratio(payoff, current):
    if current == 0:
        return 1 if payoff == 0 else math.inf
    return payoff / current


@dataclass
class StabilityReport:
    placement: tuple
    loads: list
    alpha: Fraction
    per_facility: list
    verdict: str
    exact: bool
    table: list = field(default_factory=list, repr=False)

    @property
    def stable(self) -> Optional[bool]:
        if self.verdict == "inconclusive":
            return None
        return self.verdict in ("SPE", "alpha-SPE")

    @property
    def max_gain_ratio(self):
        return max(row["ratio"] for row in self.per_facility)

    def to_dict(self, inst: Instance, decimal: bool = False) -> dict:
        def num(x):
            if x == math.inf:
                return "inf"
            return format_number(x, decimal or not self.exact)

        return {
            "placement": list(self.placement),
            "alpha": str(self.alpha),
            "verdict": self.verdict,
            "exact": self.exact,
            "loads": {str(j): num(x) for j, x in enumerate(self.loads)},
            "max_gain_ratio": num(self.max_gain_ratio),
            "facilities": [
                {"facility": j, "location": self.placement[j], "payoff": num(self.loads[j]),
                 "best_target": row["target"], "best_payoff": num(row["payoff"]),
                 "ratio": num(row["ratio"]), "violates": row["violates"]}
                for j, row in enumerate(self.per_facility)],
            "deviations": [{inst.ids[t]: num(p) for t, p in enumerate(row)} for row in self.table],
        }


def evaluate_deviation(inst: Instance, placement: Sequence[str], j: int, target: str,
                       config: SolverConfig = SolverConfig()) -> tuple[list, object]:
    """Loads after facility ``j`` relocates to ``target`` (clients re-equilibrate), and ``j``'s payoff."""
    if not 0 <= j < len(placement):
        raise InstanceError(f"facility index {j} out of range")
    moved = list(placement)
    moved[j] = target
    rep = solve(inst, moved, config)
    return rep.loads, rep.loads[j]


def _verdict(alpha, flags) -> str:
    if any(f is True for f in flags):
        return "not-SPE" if alpha == 1 else "not-alpha-SPE"
    if any(f is None for f in flags):
        return "inconclusive"
    return "SPE" if alpha == 1 else "alpha-SPE"


def _prefill(oracle: LoadOracle, multisets, jobs: int) -> None:
    todo = []
    for locs in multisets:
        for c, local_locs in _split(oracle, locs):
            key = (oracle.shapes[c], local_locs)
            if key not in oracle.cache:
                todo.append((c, local_locs))
    todo = list(dict.fromkeys(todo))
    if len(todo) < 2:
        return
    args = [(oracle.subs[c][1], local_locs, oracle.config) for c, local_locs in todo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for (c, local_locs), hit in zip(todo, pool.map(_solve_component, args)):
            oracle.cache[(oracle.shapes[c], local_locs)] = hit
            oracle.exact_only &= hit[1]


def _split(oracle, locs):
    by_comp: dict[int, list[int]] = {}
    for v in locs:
        by_comp.setdefault(oracle.comp_of[v], []).append(oracle.local[v])
    return [(c, tuple(sorted(l))) for c, l in by_comp.items()]


def _solve_component(args):
    sub, local_locs, config = args
    rep = solve(sub, tuple(sub.ids[a] for a in local_locs), config)
    per_loc = {}
    for a, load in zip(local_locs, rep.loads):
        per_loc.setdefault(a, load)
    return tuple(sorted(per_loc.items())), rep.exact


def check_stability(inst: Instance, placement: Sequence[str], alpha=1,
                    config: SolverConfig = SolverConfig(), oracle: Optional[LoadOracle] = None) -> StabilityReport:
    """Test every relocation of every facility against ``payoff <= alpha * current``.

    A facility's best deviation is its best move to a different node (ties:
    earliest node).  A facility earning 0 is violated by any positive payoff.
    """
    alpha = as_fraction(alpha)
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    oracle = oracle or LoadOracle(inst, config)
    locs = inst.locate(placement)
    if config.jobs > 1:
        devs = []
        for j in range(len(locs)):
            for t in range(inst.n):
                moved = list(locs)
                moved[j] = t
                devs.append(moved)
        _prefill(oracle, [locs] + devs, config.jobs)
    loads, exact = oracle.payoffs(locs)
    per_facility, table, flags = [], [], []
    rows_by_loc = {}
    for j, loc in enumerate(locs):
        if loc not in rows_by_loc:
            row, row_exact = [], exact
            for t in range(inst.n):
                p, ok = oracle.deviation(locs, j, t)
                row.append(p)
                row_exact &= ok
            rows_by_loc[loc] = row, row_exact
        row, row_exact = rows_by_loc[loc]
        table.append(row)
        best = None
        for t, p in enumerate(row):
            if t != loc and (best is None or p > row[best]):
                best = t
        if best is None:
            best_payoff, flag = loads[j], False
        else:
            best_payoff = row[best]
            flag = _compare(best_payoff, loads[j], alpha, row_exact, config.margin)
        exact &= row_exact
        flags.append(flag)
        per_facility.append({"target": inst.ids[best] if best is not None else placement[j],
                             "payoff": best_payoff, "ratio": _ratio(best_payoff, loads[j]),
                             "violates": flag})
    return StabilityReport(tuple(placement), loads, alpha, per_facility, _verdict(alpha, flags),
                           exact, table)


def _quick_stable(oracle: LoadOracle, locs: tuple, alpha: Fraction, by_cover: list, cover: list,
                  margin: float) -> Optional[bool]:
    """Stability of a sorted multiset with early exit; targets are pruned by coverage."""
    at, exact = oracle.loads_at(locs)
    undecided = False
    seen = set()
    for j, loc in enumerate(locs):
        if loc in seen:
            continue
        seen.add(loc)
        current = at[loc]
        for t in by_cover:
            if cover[t] <= alpha * current:
                break  # no client weight left to beat the threshold
            if t == loc:
                continue
            payoff, ok = oracle.deviation(locs, j, t)
            flag = _compare(payoff, current, alpha, exact and ok, margin)
            if flag:
                return False
            if flag is None:
                undecided = True
    return None if undecided else True


def _scan_chunk(args):
    inst, config, alpha, chunk = args
    oracle = _worker_oracle(inst, config)
    cover = [inst.cover(t) for t in range(inst.n)]
    by_cover = sorted(range(inst.n), key=lambda t: (-cover[t], t))
    for locs in chunk:
        if _quick_stable(oracle, locs, alpha, by_cover, cover, config.margin):
            return locs
    return None


_WORKER: dict = {}


def _worker_oracle(inst, config):
    key = (hash(inst), config)
    if _WORKER.get("key") != key:
        _WORKER["key"] = key
        _WORKER["oracle"] = LoadOracle(inst, config)
    return _WORKER["oracle"]


def find_spe(inst: Instance, alpha=1, config: SolverConfig = SolverConfig(),
             budget: int = 10**6, oracle: Optional[LoadOracle] = None) -> Optional[tuple[str, ...]]:
    """First alpha-stable placement in lexicographic multiset order, or None.

    Facilities are interchangeable, so only the C(n + k - 1, k) multisets of
    nodes are enumerated.  Inconclusive (inexact, borderline) placements are
    not returned as witnesses.
    """
    alpha = as_fraction(alpha)
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    total = math.comb(inst.n + inst.k - 1, inst.k)
    if total > budget:
        raise PlacementBudgetExceeded(f"{total} placements exceed the budget {budget}")
    cover = [inst.cover(t) for t in range(inst.n)]
    by_cover = sorted(range(inst.n), key=lambda t: (-cover[t], t))
    multisets = itertools.combinations_with_replacement(range(inst.n), inst.k)
    if config.jobs > 1:
        chunks = iter(lambda: list(itertools.islice(multisets, 256)), [])
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for hit in pool.map(_scan_chunk, ((inst, config, alpha, c) for c in chunks)):
                if hit is not None:
                    return inst.names(hit)
        return None
    oracle = oracle or LoadOracle(inst, config)
    undecided = 0
    for locs in multisets:
        verdict = _quick_stable(oracle, locs, alpha, by_cover, cover, config.margin)
        if verdict:
            return inst.names(locs)
        if verdict is None:
            undecided += 1
    if undecided:
        log.warning("%d placements were inconclusive under inexact solves", undecided)
    return None


def compute_approx_spe(inst: Instance, epsilon, start: Sequence[str],
                       config: SolverConfig = SolverConfig(), max_steps: Optional[int] = None):
    """Uniform-game dynamics to a (1 + eps)-equilibrium, then a (3 + 2 eps) check in the waiting-time game.

    Returns ``(placement, report, trace)``.  A failed check raises
    ApproximationViolation carrying the offending report.
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    trace = run_dynamics(inst, start, eps, max_steps=max_steps)
    placement = trace.final_placement
    report = check_stability(inst, placement, 3 + 2 * eps, config)
    if report.stable is False:
        raise ApproximationViolation(
            f"placement {placement} is not (3 + 2*{eps})-stable: max gain {report.max_gain_ratio}", report)
    return placement, report, trace


def remove_facility(inst: Instance, placement: Sequence[str], j: int,
                    config: SolverConfig = SolverConfig()) -> tuple[tuple, EquilibriumReport]:
    if len(placement) < 2:
        raise ValueError("need at least two facilities to remove one")
    if not 0 <= j < len(placement):
        raise InstanceError(f"facility index {j} out of range")
    reduced = tuple(placement[:j]) + tuple(placement[j + 1:])
    return reduced, solve(inst, reduced, config)
