"""Sweep the uniform-dynamics pipeline over random instances and report step
counts against the ceiling and the worst realized gain ratio."""
import argparse
import random
import statistics
import time
from fractions import Fraction

from flg.facility import compute_approx_spe
from flg.generators import gen_random
from flg.uniform import step_ceiling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--n-max", type=int, default=12)
    ap.add_argument("--k-max", type=int, default=4)
    ap.add_argument("--eps", type=Fraction, nargs="+", default=[Fraction(1, 20), Fraction(1, 2)])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for eps in args.eps:
        steps, usage, worst = [], [], Fraction(0)
        start = time.perf_counter()
        for s in range(args.instances):
            rng = random.Random(args.seed + s)
            n, k = rng.randint(2, args.n_max), rng.randint(1, args.k_max)
            inst = gen_random(n, rng.choice([0.1, 0.25, 0.4]), (0, 5), k, args.seed + s)
            begin = tuple(rng.choice(inst.ids) for _ in range(k))
            _, report, trace = compute_approx_spe(inst, eps, begin)
            steps.append(trace.step_count)
            usage.append(trace.step_count / step_ceiling(max(n, k), eps))
            worst = max(worst, report.max_gain_ratio)
        print(f"eps={eps}: mean steps {statistics.mean(steps):.1f}, max {max(steps)}, "
              f"max ceiling use {max(usage):.4f}, worst gain ratio {float(worst):.4f} "
              f"(bound {float(3 + 2 * eps)}), {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
