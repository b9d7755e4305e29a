"""Whitney chains of the unit disk and annulus: area and a smooth integral by level."""
import argparse
import math

from chaincalc import chain as ch
from chaincalc import domains as dom
from chaincalc import form as fm
from chaincalc import registry as reg

DISK_EXP_COS = 2.1018903484792726  # ∫_{unit disk} e^x cos 2y dA, adaptive quadrature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-level", type=int, default=9)
    a = ap.parse_args()
    w = reg.form("expx_cos2y_dxdy")
    print(f"{'level':>5} {'cubes':>8} {'disk area err':>14} {'integral err':>13} {'annulus err':>12}")
    for L in range(3, a.max_level + 1):
        D = dom.whitney_chain(dom.disk(), L)
        R = dom.whitney_chain(dom.annulus(), L)
        e_d = (ch.mass_upper(D) - math.pi) / math.pi
        e_i = (fm.evaluate(w, D) - DISK_EXP_COS) / DISK_EXP_COS
        e_r = (ch.mass_upper(R) - 0.75 * math.pi) / (0.75 * math.pi)
        print(f"{L:>5} {len(D):>8} {e_d:>14.5f} {e_i:>13.5f} {e_r:>12.5f}")


if __name__ == "__main__":
    main()
