"""Cauchy's theorem, winding numbers and residues on polygonal and circular chains."""
import argparse
import math

import numpy as np

from chaincalc import cauchy as cx
from chaincalc import domains as dom
from chaincalc import registry as reg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-power", type=int, default=12)
    ap.add_argument("--koch-level", type=int, default=6)
    a = ap.parse_args()
    f = reg.function("exp")
    print("square contour, f = exp")
    prev = None
    for j in range(4, a.max_power + 1):
        J = dom.polygon_chain(dom.square_vertices(), 1 << j)
        v = abs(cx.complex_pair(f, J))
        rate = "" if prev is None else f"  ratio {prev / v:.3f}"
        print(f"  N = 2^{j:<2d} |integral| = {v:.3e}{rate}")
        prev = v
    J = dom.polygon_chain(dom.square_vertices(), 1 << a.max_power)
    for z in [(0.0, 0.0), (0.3, -0.2), (0.49, 0.49), (0.8, 0.0)]:
        w = cx.winding(J, z)
        print(f"  winding at {z}: {w.real:+.10f} {w.imag:+.1e}i")
    K = dom.koch_boundary(a.koch_level)
    print(f"Koch level {a.koch_level}: {len(K.vertices)} edges, winding at centroid "
          f"{cx.winding(K.chain(), K.centroid).real:.12f}")
    g = reg.function("pole03_exp")
    for turns in (1, 2):
        r = cx.residue_sum(g, dom.circle_chain(N=1 << 12, turns=turns), detailed=True)
        direct = cx.complex_pair(g, dom.circle_chain(N=1 << 12, turns=turns))
        print(f"residues, {turns} turn(s): {r.value:.12f} (index {r.indices[0]}), "
              f"contour {direct:.8f}, target {turns * 2j * math.pi:.12f}")


if __name__ == "__main__":
    main()
