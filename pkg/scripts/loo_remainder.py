"""N-halving check of the leave-one-out linearization on the 0/1-loss fixture.

Prints, per N, the largest exact sup log-ratio, its linear prediction, and the
remainder; the remainder should shrink by about 4x per doubling of N.

    python scripts/loo_remainder.py --sizes 10 20 40 80 160
"""
import argparse
import tempfile
from pathlib import Path

import numpy as np

from tangentdp.audit import AuditConfig, run_loo
from tangentdp.instances import write_zero_one_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80, 160])
    ap.add_argument("--beta", type=float, default=1.0)
    args = ap.parse_args()
    prev = None
    with tempfile.TemporaryDirectory() as tmp:
        for n in args.sizes:
            cfg = write_zero_one_fixture(Path(tmp) / str(n), n_points=n, beta=args.beta)
            report, code = run_loo(AuditConfig.load(cfg))
            recs = report["loo"]
            rem = np.mean([abs(r["sup_log_ratio"] - r["linear_pred"]) for r in recs])
            ratio = "" if prev is None else f"  ratio {prev / rem:.2f}"
            print(
                f"N={n:>4d} exit={code} max ratio={max(r['sup_log_ratio'] for r in recs):.5f} "
                f"bound={recs[0]['bound_rhs']:.5f} mean remainder={rem:.3e}{ratio}"
            )
            prev = rem


if __name__ == "__main__":
    main()
