"""Genus-to-volume ratio and thin fraction along prime and all-level Gamma0 scans.

Prints Cesaro means of |4 pi g / vol - 1| per decade and the largest thin
fraction above a level cut, for both families.
"""

import argparse
import time

from orbilab.diagnostics import genus_ratio_scan, mean_ratio_deviation, prime_levels


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=10_000)
    ap.add_argument("--cut", type=int, default=1000)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()
    for label, levels in (("primes", prime_levels(2, args.nmax)),
                          ("all N", list(range(1, args.nmax + 1)))):
        t0 = time.perf_counter()
        s = genus_ratio_scan(levels, args.eps)
        dt = time.perf_counter() - t0
        lo, hi = 10, 100
        while hi <= args.nmax:
            print(f"{label:7s} mean |ratio-1| on [{lo}, {hi}]: {mean_ratio_deviation(s, lo, hi):.6f}")
            lo, hi = hi, hi * 10
        tail = [r for r in s if r.N >= args.cut]
        worst = max(tail, key=lambda r: r.thin_fraction)
        over = sum(r.thin_fraction > 1e-3 for r in tail)
        print(f"{label:7s} N >= {args.cut}: max thin fraction {worst.thin_fraction:.4e} at N = {worst.N}, "
              f"{over} levels above 1e-3 ({dt:.2f} s)")


if __name__ == "__main__":
    main()
