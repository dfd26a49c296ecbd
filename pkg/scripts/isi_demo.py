"""Print the interpolating kernel at lattice points and halfway between them."""

import argparse

import numpy as np

from gausspulse import pulse_shapes as ps
from gausspulse.params import PulseParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--lam-beta", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    args = ap.parse_args()
    n = np.arange(-10, 11)
    print(f"{'lam*beta':>9} {'max |phi_int(n lam) - delta_n|':>32} {'|phi_int(lam/2)|':>18}")
    for lb in args.lam_beta:
        p = PulseParams(args.beta, lb / args.beta)
        isi = np.max(np.abs(ps.phi_int_time(n * p.lam, p) - (n == 0)))
        half = abs(float(ps.phi_int_time(np.array([p.lam / 2]), p)[0]))
        print(f"{lb:9.3f} {isi:32.3e} {half:18.6f}")


if __name__ == "__main__":
    main()
