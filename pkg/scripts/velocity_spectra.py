"""Velocity noise spectra of the cooled mirror for gains 0 to 1e4.

Writes the five curves as CSV and prints, per curve, the peak value against
the resonance formula and the width relative to the free oscillator.
"""

import argparse
import time

from colddamp import cli, figures, spectra


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=10001, help="grid points per curve")
    ap.add_argument("--out", default="velocity_spectra.csv")
    args = ap.parse_args()

    t0 = time.perf_counter()
    curves = figures.fig2_spectra(args.points)
    elapsed = time.perf_counter() - t0
    with cli.open_output(args.out) as fh:
        spectra.write_spectrum_csv(fh, curves, db=True, comments=cli.manifest_lines("spectrum", None, {"figure": "fig2"}))

    base = None
    print(f"{'curve':>5} {'g':>8} {'peak [dB]':>10} {'peak/formula-1':>15} {'width ratio':>12}")
    for (label, s), g in zip(curves, figures.FIG2_GAINS):
        width = spectra.fwhm(s.omega, s.values)
        base = base or width
        err = s.values.max() / spectra.resonance_noise(s.cfg) - 1
        print(f"{label:>5} {g:8g} {s.db.max():10.3f} {err:15.2e} {width / base:12.2f}")
    print(f"{sum(len(s.omega) for _, s in curves)} points in {elapsed:.3f} s -> {args.out}")


if __name__ == "__main__":
    main()
