"""Built-in parameter sets for the velocity-spectrum and temperature figures."""

from __future__ import annotations

import math

import numpy as np

from .model import ValidatedConfig, make_config
from .response import FrequencyGrid
from .spectra import Spectrum, evaluate_spectrum
from .thermo import SweepRow, normalized_temperature, temperature_sweep

FIG2_Q = 1e6
FIG2_N_THETA = 1e5
FIG2_ZETA = 1.0
FIG2_GAINS = (0.0, 10.0, 1e2, 1e3, 1e4)
FIG2_LABELS = ("a", "b", "c", "d", "e")

FIG3_N_THETA = 1e5
FIG3_GAINS = (10.0, 1e3, 1e5, 1e7)
FIG3_LABELS = ("a", "b", "c", "d")
FIG3_ZETA_DECADES = (-2, 10)
FIG3_POINTS_PER_DECADE = 100


def fig2_config(gain: float) -> ValidatedConfig:
    return make_config(q=FIG2_Q, n_theta=FIG2_N_THETA, zeta=FIG2_ZETA, gain=gain)


def fig2_grid(points: int = 10001) -> FrequencyGrid:
    """Shared grid around Omega_m = 1, resolving widths from 1e-6 to 1e-2."""
    return FrequencyGrid.resonance(1.0, 1e-8, 0.1, points)


def fig2_spectra(points: int = 10001, variant: str = "flat") -> list[tuple[str, Spectrum]]:
    grid = fig2_grid(points)
    return [
        (label, evaluate_spectrum(fig2_config(g), grid, variant))
        for label, g in zip(FIG2_LABELS, FIG2_GAINS)
    ]


def fig3_zetas() -> np.ndarray:
    lo, hi = FIG3_ZETA_DECADES
    return np.logspace(lo, hi, (hi - lo) * FIG3_POINTS_PER_DECADE + 1)


def fig3_rows() -> list[tuple[str, SweepRow]]:
    """Temperature-vs-zeta curves plus the locus of per-gain minima.

    The locus rows sit at zeta = g, where the minimum over zeta is reached.
    The temperature figure has no quality factor, so g < Q is not enforced.
    """
    zetas = fig3_zetas()
    out: list[tuple[str, SweepRow]] = []
    for label, g in zip(FIG3_LABELS, FIG3_GAINS):
        out.extend((label, row) for row in temperature_sweep(FIG3_N_THETA, [g], zetas, q=math.inf))
    lo, hi = FIG3_ZETA_DECADES
    for g in np.logspace(max(lo, 0), hi, (hi - max(lo, 0)) * 10 + 1):
        t = float(normalized_temperature(FIG3_N_THETA, g, g))
        out.append(("locus", SweepRow(float(g), float(g), t, t / 2.0 - 0.5, True)))
    return out
