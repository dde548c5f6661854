"""Regenerate tests/data/gamma0_golden.csv from the coset-enumeration oracle.

The table is built from the oracle only, never from the closed formulas, so it
can serve as independent ground truth for them.
"""

import argparse
from pathlib import Path

from orbilab.arith import GAMMA0, coset_enumeration_oracle, write_golden_table

DEFAULT = Path(__file__).resolve().parents[1] / "tests" / "data" / "gamma0_golden.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=300)
    ap.add_argument("--out", type=Path, default=DEFAULT)
    args = ap.parse_args()
    rows = [coset_enumeration_oracle(N, GAMMA0) for N in range(1, args.nmax + 1)]
    write_golden_table(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
