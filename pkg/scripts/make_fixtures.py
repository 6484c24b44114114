"""Write the bundled example inputs under fixtures/.

    python scripts/make_fixtures.py [--out fixtures]
"""
import argparse
from pathlib import Path

from tangentdp.instances import write_zero_one_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    args = ap.parse_args()
    for n in (20, 80):
        cfg = write_zero_one_fixture(args.out / f"zero_one_n{n}", n_points=n)
        print(f"wrote {cfg}")


if __name__ == "__main__":
    main()
