"""Check both reductions on small graphs.

The independent-set gadget is compared with brute force on every graph with
at most 5 vertices and degree at most 3.  The max-cut gadget is run with
both edge wirings; equilibria come from strict best-response dynamics.
"""
import argparse
import itertools
import random
import time

import networkx as nx

from flg.facility import find_spe
from flg.generators import gen_is_reduction, gen_maxcut_reduction, has_independent_set, is_local_max_cut
from flg.uniform import improve_to_equilibrium


def independent_set_check():
    start, rows = time.perf_counter(), 0
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() > 5 or any(d > 3 for _, d in g.degree()):
            continue
        for k in (1, 2):
            inst, _ = gen_is_reduction(g, k)
            assert (find_spe(inst) is not None) == has_independent_set(g, k), (list(g.edges), k)
            rows += 1
    print(f"independent set: {rows} cases agree ({time.perf_counter() - start:.1f} s)")


def maxcut_check(wiring, starts, seed):
    rng = random.Random(seed)
    good = bad = 0
    for g in nx.graph_atlas_g():
        if not 1 <= g.number_of_edges() <= 3 or any(d == 0 for _, d in g.degree()):
            continue
        for weights in itertools.product((1, 2, 3), repeat=g.number_of_edges()):
            h = nx.Graph()
            h.add_weighted_edges_from((u, v, w) for (u, v), w in zip(g.edges, weights))
            inst, decode, _ = gen_maxcut_reduction(h, wiring)
            for _ in range(starts):
                eq = improve_to_equilibrium(inst, tuple(rng.choice(inst.ids) for _ in range(inst.k)))
                if is_local_max_cut(h, decode(eq)):
                    good += 1
                else:
                    bad += 1
    print(f"max cut ({wiring}): {good} locally optimal, {bad} not")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--starts", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    independent_set_check()
    for wiring in ("parallel", "crossed"):
        maxcut_check(wiring, args.starts, args.seed)


if __name__ == "__main__":
    main()
