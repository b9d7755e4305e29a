"""Orbit chains on the torus: pairings, boundary decay and ergodic gaps by horizon."""
import argparse
import math

import numpy as np

from chaincalc import dynamics as dyn
from chaincalc import form as fm
from chaincalc import registry as reg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--field", default="shear")
    ap.add_argument("--T", type=float, default=2000.0)
    ap.add_argument("--grid", type=int, default=128)
    a = ap.parse_args()
    flow = reg.flow(a.field)
    p = (0.1, 0.2)
    forms = [reg.form(n) for n in ("dx", "dy", "cos2pix_dx", "sin2piy_dx")]
    Ts = [a.T / 2 ** j for j in range(4, -1, -1)]
    lad = dyn.ladder(flow, p, Ts, forms)
    print(f"{'T':>8} {'dx':>10} {'dy':>10} {'cos dx':>10} {'sin dx':>10} {'max bdry':>10}")
    for T, v, b in zip(lad.T, lad.values, lad.boundary):
        print(f"{T:>8.0f} " + " ".join(f"{x:>10.6f}" for x in v) + f" {np.abs(b).max():>10.3e}")
    print(f"boundary decay exponent {lad.slope:.3f}; envelope {dyn.cauchy_envelope(lad.values)}")
    mu = dyn.MeasureSpec.lebesgue(a.grid)
    print(f"invariance residual of Lebesgue {dyn.invariance_residual(flow, mu):.2e}")
    if dyn.invariance_residual(flow, mu) <= 1e-6:
        print(f"ergodic gap at T={a.T:g}: {dyn.ergodic_gap(flow, p, a.T, mu, forms):.3e}")
    w = reg.form("cos2pi_x_minus_2y_dx")
    rat = reg.flow("rational")
    vals = [fm.evaluate(w, dyn.orbit_chain(rat, (x0, 0.0), 50.0)) for x0 in (0.0, 0.125, 0.25)]
    print(f"rational slope, cos 2π(x−2y) dx along orbits from x0 = 0, 1/8, 1/4: "
          + ", ".join(f"{v:.6f}" for v in vals) + f" (Lebesgue average {0.0})")


if __name__ == "__main__":
    main()
