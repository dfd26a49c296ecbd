"""Impulse-response gap between the realizations as the order grows.

The cascade gap should track q^(2N+1)/(1-q^2) times the coefficient scale,
while the all-pole and FIR forms meet at rounding level once both tails are
negligible.
"""

import argparse

import numpy as np

from gausspulse import filter_design as fd
from gausspulse.params import PulseParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam-beta", type=float, default=1.0)
    ap.add_argument("--samples", type=int, default=21)
    ap.add_argument("--orders", type=int, nargs="+", default=[10, 20, 30, 40, 50, 53, 60])
    args = ap.parse_args()
    p = PulseParams(1.0, args.lam_beta)
    q = p.q
    scale = np.max(np.abs(fd.coefficients_a(p, args.samples - 1).values))
    print(f"{'N':>4} {'H1-H2':>10} {'H1-H3':>10} {'predicted H2 tail':>18}")
    for N in args.orders:
        h1, h2, h3 = (fd.impulse_response(b(p, N), args.samples) for b in (fd.build_H1, fd.build_H2, fd.build_H3))
        tail = scale * q ** (2 * N + 1) / (1 - q * q)
        print(f"{N:4d} {np.max(np.abs(h1 - h2)):10.2e} {np.max(np.abs(h1 - h3)):10.2e} {tail:18.2e}")


if __name__ == "__main__":
    main()
