"""Signed density of a cone over a star polygon compared with the winding number."""
import argparse

import numpy as np

from chaincalc import cauchy as cx
from chaincalc import domains as dom


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--mc", type=int, default=30000)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    m = 9
    th = np.sort(rng.uniform(0, 2 * np.pi, m))
    rad = np.where(np.arange(m) % 2, rng.uniform(0.2, 0.4, m), rng.uniform(0.7, 1.0, m))
    V = np.stack([rad * np.cos(th), rad * np.sin(th)], axis=1)
    K = dom.cone_at([0.9, -0.7], dom.PolyhedralChain.polygon(V))
    print(f"cone over a {m}-gon: {len(K)} signed triangles")
    print(f"{'z':>22} {'exact':>9} {'mc':>9} {'sigma':>9} {'winding':>8}")
    for i in range(a.points):
        z = rng.uniform(-1.1, 1.1, 2)
        ex = cx.signed_density(K, z)
        mc = cx.signed_density(K, z, mc_budget=a.mc, seed=i)
        print(f"{np.array2string(z, precision=3):>22} {ex.value:>9.5f} {mc.value:>9.5f} {mc.stderr:>9.2e} "
              f"{cx.winding_polygon(V, z):>8.4f}")


if __name__ == "__main__":
    main()
