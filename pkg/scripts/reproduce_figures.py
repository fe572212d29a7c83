"""Print the worked examples: the two small splitting instances, the
four-node path without an SPE, and the lower-bound family's gain ratios."""
import time
from fractions import Fraction as F

from flg import check_stability, find_spe, solve_exact
from flg.client import client_cost
from flg.facility import evaluate_deviation
from flg.generators import gen_fig1, gen_gstar, gen_lowerbound, lowerbound_spe_placement
from flg.uniform import is_uniform_equilibrium


def show_split(side, placement, client):
    inst = gen_fig1(side)
    rep = solve_exact(inst, placement)
    cost = client_cost(inst, placement, rep.sigma, client)
    print(f"fig1-{side} {placement}: loads {[str(x) for x in rep.loads]}, "
          f"{client} split {dict((j, str(v)) for j, v in rep.sigma.of(client).items())}, cost {cost}")


def main():
    show_split("left", ("v0", "v2"), "v1")
    show_split("right", ("v0", "v3"), "v1")

    inst = gen_gstar()
    print("\npath v1..v4, weights 3 2 7 1")
    for placement in [("v2", "v3"), ("v2", "v4"), ("v3", "v4"), ("v3", "v3")]:
        rep = check_stability(inst, placement, 1)
        j = max(range(2), key=lambda i: rep.per_facility[i]["ratio"])
        row = rep.per_facility[j]
        loads, _ = evaluate_deviation(inst, placement, j, row["target"])
        print(f"  {placement}: payoffs {[str(x) for x in rep.loads]}  best move f{j + 1} -> {row['target']}"
              f" gives {[str(x) for x in loads]} (ratio {row['ratio']})")
    start = time.perf_counter()
    print(f"  exhaustive SPE search: {find_spe(inst)} ({time.perf_counter() - start:.3f} s)")

    print("\nlower-bound family")
    for t in (2, 3, 5, 10):
        inst = gen_lowerbound(t)
        placement = lowerbound_spe_placement(t)
        start = time.perf_counter()
        _, payoff = evaluate_deviation(inst, placement, 0, "va")
        closed = F(2 * t * t, t * t + t + 2)
        print(f"  t={t:2d}: deviation payoff {payoff} (closed form {closed}), uniform SPE "
              f"{is_uniform_equilibrium(inst, placement)}, {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()
