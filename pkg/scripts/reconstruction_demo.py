"""Run the sampling pipeline on random Gaussian mixtures and compare with the bound."""

import argparse

import numpy as np

from gausspulse.params import PulseParams
from gausspulse.sampling import GaussianMixture, phi_descriptor, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--lam-beta", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--components", type=int, default=3)
    args = ap.parse_args()
    print(f"{'lam*beta':>9} {'signal':>8} {'error_sup^2':>12} {'bound':>10} {'ok':>3}")
    for lb in args.lam_beta:
        p = PulseParams(args.beta, lb / args.beta)
        x = p.lam * np.linspace(-6, 6, 193)
        signals = [("phi", phi_descriptor(p))]
        signals += [(f"mix{s}", GaussianMixture.random(args.components, p, s)) for s in range(args.seeds)]
        for name, f in signals:
            r = run_pipeline(f, p, x)
            print(f"{lb:9.3f} {name:>8} {r.error_sup**2:12.3e} {r.bound:10.3e} {'yes' if r.passed else 'no':>3}")


if __name__ == "__main__":
    main()
