"""Two sampled B^r norm estimates of smooth forms on the unit square, by budget."""
import argparse

from chaincalc import form as fm
from chaincalc import registry as reg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budgets", default="1000,10000,100000")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    R = fm.Region([0, 0], [1, 1])
    print(f"{'form':>18} {'r':>2} {'budget':>7} {'derivative':>11} {'difference':>11} {'gap':>7}")
    for w in reg.smooth_form_bank():
        for r in (0, 1, 2):
            for m in (int(b) for b in a.budgets.split(",")):
                x = fm.form_norm_estimate(w, r, R, m, a.seed)
                y = fm.difference_norm_probe(w, r, R, m, a.seed)
                print(f"{w.name:>18} {r:>2} {m:>7} {x:>11.6f} {y:>11.6f} {abs(x - y) / max(x, y):>7.4f}")


if __name__ == "__main__":
    main()
