"""Degree-1 heat-trace bound on b1/vol against t and the synthetic family scale."""

import argparse

from orbilab.arith import synthetic_3d_descriptor
from orbilab.margulis import bisect_increasing
from orbilab.trace import b1_upper_bound, one_form_profile_h3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ts = (1.0, 10.0, 50.0, 100.0, 200.0)
    print("scale " + " ".join(f"t={t:<8g}" for t in ts))
    for scale in (1.0, 1e2, 1e4, 1e6):
        d = synthetic_3d_descriptor(args.seed, scale, args.eps)
        print(f"{scale:<5g} " + " ".join(f"{b1_upper_bound(d, args.eps, t).value:<10.4g}" for t in ts))
    print("identity density alone: " + " ".join(f"{one_form_profile_h3(t):.4g}" for t in ts))
    for level in (1e-2, 1e-3):
        # profile is decreasing, so bisect on its negative
        t = bisect_increasing(lambda s: -one_form_profile_h3(s), -level, 1.0, 2.0, hi_max=1e7)
        print(f"identity density drops below {level:g} at t = {t:.1f}")


if __name__ == "__main__":
    main()
