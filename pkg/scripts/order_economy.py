"""Compare the orders each filter realization needs for a given tail tolerance."""

import argparse

from gausspulse import filter_design as fd
from gausspulse.params import PulseParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-12)
    ap.add_argument("--lam-beta", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.5, 2.0])
    args = ap.parse_args()
    names = ("H1", "H2", "H3", "H4")
    print(f"{'lam*beta':>9} " + " ".join(f"{n:>6}" for n in names))
    for lb in args.lam_beta:
        p = PulseParams(1.0, lb)
        print(f"{lb:9.3f} " + " ".join(f"{fd.select_order(p, n, args.tol):6d}" for n in names))


if __name__ == "__main__":
    main()
