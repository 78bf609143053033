"""Command-line interface.

Exit codes: 0 success, 1 failing invariant checks (``check``), 2 invalid
configuration or usage, 3 approximation-domain violation, 4 hard invariant
failure in ``limits``.

Every flag can also be given as an environment variable ``COLDDAMP_<FLAG>``
(e.g. ``COLDDAMP_UNITS=si``); command-line flags win over the environment,
which wins over the configuration file.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from typing import Iterator, Optional, TextIO

import numpy as np

from . import __version__, figures, qlimits, spectra, thermo
from .errors import ConfigError, DomainError, GainExceedsQ
from .model import ValidatedConfig, load_config
from .response import FrequencyGrid

ENV_PREFIX = "COLDDAMP_"

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INVARIANT = 0, 1, 2, 3, 4

# flags that may come from the environment, with their parsers
_ENV_FLAGS = {
    "config": str,
    "out": str,
    "units": str,
    "grid": str,
    "variant": str,
    "figure": str,
    "seed": int,
    "zeta": str,
    "gain": str,
    "format": str,
    "one_sided": "bool",
    "db": "bool",
    "gnuplot_hint": "bool",
    "classical_limit": "bool",
    "integrate": "bool",
}


class UsageError(Exception):
    pass


def _env_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"cannot read {text!r} as a boolean")


def apply_env(args: argparse.Namespace, environ=os.environ) -> argparse.Namespace:
    """Fill flags left unset on the command line from COLDDAMP_* variables."""
    for name, kind in _ENV_FLAGS.items():
        if not hasattr(args, name):
            continue
        current = getattr(args, name)
        if current not in (None, False):
            continue
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        try:
            value = _env_bool(raw) if kind == "bool" else kind(raw)
        except ValueError as exc:
            raise UsageError(f"{ENV_PREFIX}{name.upper()}: {exc}") from exc
        setattr(args, name, value)
    return args


# --- output plumbing -----------------------------------------------------------


def manifest_lines(subcommand: str, cfg_digest: Optional[str], flags: dict) -> list[str]:
    body = {"subcommand": subcommand, "config_digest": cfg_digest, "flags": flags}
    digest = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
    return [
        f"colddamp tool_version={__version__}",
        f"subcommand={subcommand}",
        f"config_digest={cfg_digest or 'builtin'}",
        "flags=" + json.dumps(flags, sort_keys=True),
        f"manifest_digest={digest}",
    ]


@contextlib.contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Stdout, or a temp file renamed onto ``path`` only if the body succeeds."""
    if path is None:
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".colddamp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _resolved_flags(args: argparse.Namespace, names: list[str]) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) not in (None, False)}


def _config(args: argparse.Namespace, required: bool = True) -> Optional[ValidatedConfig]:
    if args.config is None:
        if required:
            raise UsageError("this subcommand needs --config PATH (or a --figure preset)")
        return None
    return load_config(args.config, units=args.units)


GNUPLOT_SPECTRUM = """\
set datafile separator ','
set logscale x
set xlabel 'Omega'
set ylabel 'sigma_VV (dB)'
plot for [c in 'a b c d e'] '{out}' using 2:(strcol(1) eq c ? $4 : 1/0) with lines title c
"""

GNUPLOT_SWEEP = """\
set datafile separator ','
set logscale xy
set xlabel 'zeta'
set ylabel 'Theta_fb / (hbar Omega_m / 2 kB)'
plot for [c in 'a b c d locus'] '{out}' using 3:(strcol(1) eq c ? $4 : 1/0) with lines title c
"""


def _hint(args, template: str) -> None:
    if args.gnuplot_hint:
        stream = sys.stdout if args.out else sys.stderr
        stream.write(template.format(out=args.out or "data.csv"))


# --- subcommands ---------------------------------------------------------------


def render_fig2(fh: TextIO, points: int = 10001, one_sided: bool = False, flags: Optional[dict] = None) -> None:
    curves = figures.fig2_spectra(points)
    if one_sided:
        curves = [(label, s.one_sided()) for label, s in curves]
    comments = manifest_lines("spectrum", None, flags or {"figure": "fig2"})
    comments.append(
        f"figure fig2: Q={figures.FIG2_Q:g} n_theta={figures.FIG2_N_THETA:g} "
        f"zeta={figures.FIG2_ZETA:g} gains a-e={list(figures.FIG2_GAINS)}"
    )
    spectra.write_spectrum_csv(fh, curves, db=True, comments=comments)


def cmd_spectrum(args: argparse.Namespace) -> int:
    flags = _resolved_flags(args, ["figure", "grid", "variant", "one_sided", "db", "units"])
    if args.figure not in (None, "fig2"):
        raise UsageError("spectrum supports --figure fig2 only")
    if args.figure == "fig2":
        with open_output(args.out) as fh:
            render_fig2(fh, one_sided=args.one_sided, flags=flags)
        _hint(args, GNUPLOT_SPECTRUM)
        return EXIT_OK
    cfg = _config(args)
    if args.grid:
        try:
            grid = FrequencyGrid.parse(args.grid)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        width = (1 + cfg.g_diss) * cfg.osc.linewidth
        half = min(0.5 * cfg.osc.omega_m, 50 * width)
        grid = FrequencyGrid.resonance(cfg.osc.omega_m, width / 100, half, 10001)
    spec = spectra.evaluate_spectrum(cfg, grid, args.variant or "general")
    if args.one_sided:
        spec = spec.one_sided()
    with open_output(args.out) as fh:
        spectra.write_spectrum_csv(
            fh, [(None, spec)], db=args.db, comments=manifest_lines("spectrum", cfg.digest(), flags)
        )
    _hint(args, GNUPLOT_SPECTRUM)
    return EXIT_OK


def _write_sweep(fh: TextIO, rows, comments, labelled: bool) -> None:
    for line in comments:
        fh.write(f"# {line}\n")
    cols = "g,zeta,theta_fb_normalized,n_theta_fb,is_optimum"
    fh.write(("curve," + cols if labelled else cols) + "\n")
    for label, r in rows:
        vals = [_fmt(r.g), _fmt(r.zeta), _fmt(r.theta_fb_normalized), _fmt(r.n_theta_fb), str(int(r.is_optimum))]
        if labelled:
            vals.insert(0, label)
        fh.write(",".join(vals) + "\n")


def render_fig3(fh: TextIO, flags: Optional[dict] = None) -> None:
    comments = manifest_lines("sweep", None, flags or {"figure": "fig3"})
    comments.append(
        f"figure fig3: n_theta={figures.FIG3_N_THETA:g} gains a-d={list(figures.FIG3_GAINS)}; "
        "curve 'locus' holds the per-gain minimum at zeta = g"
    )
    _write_sweep(fh, figures.fig3_rows(), comments, labelled=True)


def _range(spec: str) -> np.ndarray:
    return FrequencyGrid.parse(spec).samples if spec.count(":") == 3 else np.array([float(spec)])


def cmd_sweep(args: argparse.Namespace) -> int:
    flags = _resolved_flags(args, ["figure", "zeta", "gain", "units"])
    if args.figure not in (None, "fig3"):
        raise UsageError("sweep supports --figure fig3 only")
    if args.figure == "fig3":
        with open_output(args.out) as fh:
            render_fig3(fh, flags)
        _hint(args, GNUPLOT_SWEEP)
        return EXIT_OK
    cfg = _config(args)
    spectra._require_cold_damping(cfg)
    try:
        zetas = _range(args.zeta) if args.zeta else np.array([cfg.zeta])
        gains = _range(args.gain) if args.gain else np.array([cfg.g_diss])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = thermo.temperature_sweep(cfg.n_theta, gains, zetas, q=cfg.q)
    with open_output(args.out) as fh:
        _write_sweep(fh, [(None, r) for r in rows], manifest_lines("sweep", cfg.digest(), flags), False)
    _hint(args, GNUPLOT_SWEEP)
    return EXIT_OK


def _write_kv(fh: TextIO, items: dict, fmt: str, comments=()) -> None:
    def show(v):
        return _fmt(v) if isinstance(v, float) else str(v)

    if fmt == "csv":
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(items) + "\n")
        fh.write(",".join(show(v) for v in items.values()) + "\n")
    else:
        width = max(len(k) for k in items)
        for k, v in items.items():
            fh.write(f"{k:<{width}} = {show(v)}\n")


def cmd_temperature(args: argparse.Namespace) -> int:
    flags = _resolved_flags(args, ["classical_limit", "integrate", "units", "format"])
    cfg = _config(args)
    fmt = args.format or "text"
    try:
        items = thermo.temperature_report(cfg, classical_limit=args.classical_limit).as_dict()
    except GainExceedsQ:
        if not args.integrate:
            raise
        items = {"g": cfg.g_diss, "zeta": cfg.zeta, "theta_m": cfg.theta_m, "n_theta": cfg.n_theta}
        variant = "general"
    else:
        variant = "flat"
    if args.integrate:
        s = spectra.evaluate_spectrum(cfg, thermo.integration_grid(cfg), variant)
        t = thermo.equipartition_temperature(s)
        items["theta_fb_integrated"] = t
        items["theta_fb_integrated_normalized"] = t / cfg.zero_point_temperature
        items["integrated_spectrum"] = variant
    with open_output(args.out) as fh:
        _write_kv(fh, items, fmt, manifest_lines("temperature", cfg.digest(), flags))
    return EXIT_OK


def cmd_limits(args: argparse.Namespace) -> int:
    flags = _resolved_flags(args, ["units"])
    cfg = _config(args)
    report, presc = qlimits.noise_report(cfg)
    w = np.geomspace(1e-2, 1e2, 101) * cfg.osc.omega_m
    unitarity = float(np.max(qlimits.output_commutator_residual(cfg, w)))
    closure = math.nan
    if not presc.infinite:
        closure = qlimits.heisenberg_margin(cfg.replace(light=presc.light_state()))
    checks = {
        "commutator": report.commutator_ok,
        "output_unitarity": unitarity < 1e-10,
        "heisenberg_floor": report.heisenberg_ok,
        "squeezing_closure": presc.infinite or abs(closure - 1.0) < 1e-12,
    }
    items = {
        "g_mod": report.g_mod,
        "g_diss": report.g_diss,
        "zeta": cfg.zeta,
        "commutator_coefficient": report.commutator_coefficient,
        "commutator_target": report.commutator_target,
        "commutator_residual": report.commutator_residual,
        "commutator_check": "pass" if checks["commutator"] else "FAIL",
        "output_unitarity_residual": unitarity,
        "sigma_ff": report.sigma_ff,
        "sigma_ff_general_cavity": report.sigma_ff_general,
        "heisenberg_margin": report.heisenberg_margin,
        "heisenberg_check": "pass" if checks["heisenberg_floor"] else "FAIL",
        "theta_fb_in_normalized": report.theta_fb_in_normalized,
        "theta_fb_normalized": report.theta_fb / cfg.zero_point_temperature,
        "limit": report.limit,
        "squeeze_s11": presc.s11,
        "squeeze_s22": presc.s22,
        "squeeze_s12": presc.s12,
        "squeeze_xi": presc.xi,
        "squeeze_angle": presc.quadrature_angle,
        "squeeze_closure_margin": closure,
    }
    _write_kv(sys.stdout, items, "text")
    if args.out:
        with open_output(args.out) as fh:
            _write_kv(fh, items, "csv", manifest_lines("limits", cfg.digest(), flags))
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        print(f"invariant failure: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    from .invariants import run_checks

    cfg = _config(args, required=False)
    results = run_checks(cfg, seed=args.seed or 0)
    out = io.StringIO()
    for r in results:
        out.write(r.line() + "\n")
    failed = [r.name for r in results if r.status == "FAIL"]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed or skipped\n")
    if failed:
        out.write("failing: " + ", ".join(failed) + "\n")
    text = out.getvalue()
    sys.stdout.write(text)
    if args.out:
        with open_output(args.out) as fh:
            fh.write(text)
    return EXIT_CHECKS if failed else EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--units", choices=("si", "normalized"), help="override the config unit mode")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    common.add_argument("--gnuplot-hint", action="store_true", help="print a gnuplot script for the output")

    parser = argparse.ArgumentParser(prog="colddamp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="velocity noise spectrum as CSV")
    p.add_argument("--grid", metavar="START:STOP:POINTS:lin|log")
    p.add_argument("--variant", choices=spectra.VARIANTS)
    p.add_argument("--figure", choices=("fig2",))
    p.add_argument("--one-sided", action="store_true", help="2*sigma over Omega > 0")
    p.add_argument("--db", action="store_true", help="add sigma_vv_db column")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", parents=[common], help="cooled temperature over (g, zeta)")
    p.add_argument("--zeta", metavar="START:STOP:POINTS:lin|log", help="zeta values (or a single number)")
    p.add_argument("--gain", metavar="START:STOP:POINTS:lin|log", help="gain values (or a single number)")
    p.add_argument("--figure", choices=("fig3",))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("temperature", parents=[common], help="single-point temperature report")
    p.add_argument("--format", choices=("text", "csv"))
    p.add_argument("--classical-limit", action="store_true", help="drop the light-noise terms")
    p.add_argument("--integrate", action="store_true", help="add the equipartition temperature")
    p.set_defaults(func=cmd_temperature)

    p = sub.add_parser("limits", parents=[common], help="feedback noise and Heisenberg limits")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("check", parents=[common], help="run the invariant suite")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_env(args)
        return args.func(args)
    except BrokenPipeError:
        return EXIT_OK
    except (ConfigError, UsageError, OSError) as exc:
        print(f"colddamp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"colddamp: approximation domain violated: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
