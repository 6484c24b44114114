"""Sweep random instances and compare exact tangent-map norms with 2*beta*R.

For each of the four norm pairs prints the number of violations, the largest
exact/bound ratio, and for the H-1 -> TV pair the same numbers against the
sound constant sum_w q(w) ||r(w, .)||_H1.

    python scripts/dominance_sweep.py --instances 1000 --seed 0
"""
import argparse
import time

import numpy as np

from tangentdp.certification import NormPair, certify
from tangentdp.instances import random_instance

PAIRS = ("tv-tv", "tv-linf", "w2-tv", "w2-linf")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-size", type=int, default=10)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    stats = {name: [] for name in PAIRS}
    sound = []
    t0 = time.perf_counter()
    for _ in range(args.instances):
        inst = random_instance(rng, max_size=args.max_size)
        for name in PAIRS:
            cert = certify(inst.mechanism, inst.p, NormPair.from_name(name, inst.laplacian))
            stats[name].append((cert.exact_ambient, cert.bound))
            if name == "w2-tv":
                sound.append((cert.exact_ambient, cert.sound_bound))

    def summary(rows):
        rows = np.array(rows)
        viol = int(np.sum(rows[:, 0] > rows[:, 1] + 1e-9))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rows[:, 1] > 0, rows[:, 0] / rows[:, 1], np.where(rows[:, 0] > 0, np.inf, 0.0))
        return viol, float(ratio.max())

    print(f"{args.instances} instances, {time.perf_counter() - t0:.1f}s")
    print(f"{'pair':<22}{'violations':>12}{'max exact/bound':>18}")
    for name in PAIRS:
        v, r = summary(stats[name])
        print(f"{name:<22}{v:>12}{r:>18.4f}")
    v, r = summary(sound)
    print(f"{'w2-tv (sound R)':<22}{v:>12}{r:>18.4f}")


if __name__ == "__main__":
    main()
