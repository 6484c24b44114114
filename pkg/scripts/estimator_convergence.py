"""Mean absolute error of the Monte Carlo R estimators against the exact values.

    python scripts/estimator_convergence.py --seeds 16
"""
import argparse

import numpy as np

from tangentdp.certification import Theorem, theorem_R
from tangentdp.estimators import estimate_R_T1, estimate_R_T3
from tangentdp.instances import random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=16)
    ap.add_argument("--instance-seed", type=int, default=77)
    ap.add_argument("--counts", type=int, nargs="+", default=[1_000, 3_000, 10_000, 30_000, 100_000])
    args = ap.parse_args()

    inst = random_instance(np.random.default_rng(args.instance_seed), n_w=5, n_x=8, beta=1.0)
    m, p, L = inst.mechanism, inst.p, inst.laplacian
    exact = {"T1": theorem_R(m, p, Theorem.T1), "T3": theorem_R(m, p, Theorem.T3, L)}
    run = {
        "T1": lambda n, s: estimate_R_T1(m, p, n, s).estimate,
        "T3": lambda n, s: estimate_R_T3(m, p, L, n, s).estimate,
    }
    for target in ("T1", "T3"):
        print(f"R_{target} exact = {exact[target]:.10f}")
        gaps = []
        for n in args.counts:
            gap = np.mean([abs(run[target](n, s) - exact[target]) for s in range(args.seeds)])
            gaps.append(gap)
            print(f"  n={n:>8d}  mean|gap|={gap:.3e}")
        slope = np.polyfit(np.log(args.counts), np.log(gaps), 1)[0]
        print(f"  log-log slope {slope:.3f}")


if __name__ == "__main__":
    main()
