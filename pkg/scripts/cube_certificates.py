"""Certified B^1 gaps between consecutive dyadic cube chains."""
import argparse
import math
import time

from chaincalc import domains as dom
from chaincalc import norm as nm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="2,3")
    ap.add_argument("--max-level", type=int, default=6)
    a = ap.parse_args()
    print(f"{'n':>2} {'k':>2} {'terms':>10} {'cost':>14} {'bound':>14} {'ratio':>8} {'secs':>7}")
    for n in (int(d) for d in a.dims.split(",")):
        for k in range(1, a.max_level + 1):
            t0 = time.perf_counter()
            A = dom.cube_difference(dim=n, level=k)
            cost = nm.certify_pairing(A).cost
            bound = math.sqrt(n) * 2.0 ** -(k + 1)
            print(f"{n:>2} {k:>2} {len(A):>10} {cost:>14.6e} {bound:>14.6e} {cost / bound:>8.5f} "
                  f"{time.perf_counter() - t0:>7.2f}")


if __name__ == "__main__":
    main()
