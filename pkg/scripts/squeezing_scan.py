"""How squeezed light moves the optimum and lowers the feedback noise.

Part 1 scans zeta for phase-squeezed input and compares the minimizer with
exp(-xi) g. Part 2 prints the prescribed light state for complex feedback
impedances at zeta = g and its squeezing factor.
"""

import argparse
import math

import numpy as np

from colddamp import qlimits
from colddamp.model import LightState, make_config


def phase_squeezing_scan(g, xis, zetas):
    print(f"phase squeezing, g = {g:g}")
    print(f"{'xi':>5} {'zeta_min/g':>11} {'exp(-xi)':>9} {'T_min':>8}")
    for xi in xis:
        light = LightState(math.exp(xi), math.exp(-xi), 0.0)
        temps = np.array([
            qlimits.normalized_feedback_noise_temperature(make_config(q=1e9, n_theta=0.0, zeta=z, gain=g, light=light))
            for z in zetas
        ])
        i = int(np.argmin(temps))
        print(f"{xi:5.2f} {zetas[i] / g:11.4f} {math.exp(-xi):9.4f} {temps[i]:8.5f}")


def rotated_prescriptions(reactive):
    print("\nprescriptions at zeta = |Z_fb|/H_m, H_fb = H_m")
    print(f"{'X/H':>6} {'s11':>8} {'s22':>8} {'s12':>8} {'xi':>7} {'angle':>7} {'|Z|-|X|':>8} {'T_coh':>7}")
    for x in reactive:
        cfg = make_config(q=1e9, n_theta=0.0, zeta=math.hypot(1, x), gain=1.0, reactive_gain=x)
        p = qlimits.optimize_squeezing(cfg)
        coherent = qlimits.normalized_feedback_noise_temperature(cfg)
        print(
            f"{x:6.2f} {p.s11:8.4f} {p.s22:8.4f} {p.s12:8.4f} {p.xi:7.4f} "
            f"{math.degrees(p.quadrature_angle):7.2f} {math.hypot(1, x) - abs(x):8.4f} {coherent:7.4f}"
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gain", type=float, default=1e3)
    ap.add_argument("--xi", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()
    phase_squeezing_scan(args.gain, args.xi, np.geomspace(args.gain * 1e-3, args.gain * 10, 8001))
    rotated_prescriptions([-4.0, -1.0, 0.25, 1.0, 4.0])


if __name__ == "__main__":
    main()
