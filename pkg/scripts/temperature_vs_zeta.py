"""Cooled-mirror temperature against the optomechanical parameter zeta.

Writes the four gain curves plus the minimum locus as CSV and prints where
each curve bottoms out.
"""

import argparse

from colddamp import cli, figures


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="temperature_vs_zeta.csv")
    args = ap.parse_args()

    with cli.open_output(args.out) as fh:
        cli.render_fig3(fh)

    rows = figures.fig3_rows()
    n = figures.FIG3_N_THETA
    print(f"{'g':>8} {'zeta at min':>12} {'Theta_min':>12} {'2n/(1+g)+1':>12}")
    for label, g in zip(figures.FIG3_LABELS, figures.FIG3_GAINS):
        best = next(r for lab, r in rows if lab == label and r.is_optimum)
        print(f"{g:8g} {best.zeta:12.4g} {best.theta_fb_normalized:12.6f} {2 * n / (1 + g) + 1:12.6f}")
    print(f"-> {args.out}")


if __name__ == "__main__":
    main()
