"""Effective temperatures, phonon numbers and equipartition by spectral integration."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GainExceedsQ, InsufficientGridCoverage, ReactiveFeedbackNotAllowed
from .model import ValidatedConfig
from .response import FrequencyGrid
from .spectra import Spectrum, _require_cold_damping, _require_gain_below_q

# grid coverage required by variance_by_integration, relative to Omega_m
COVERAGE_LOW = 1.0 / 50.0
COVERAGE_HIGH = 50.0


def normalized_temperature(n_theta, g, zeta, s11=1.0, s22=1.0):
    """Theta_fb / (hbar Omega_m / 2 kB) for cold damping with a wide cavity.

    ``s11`` and ``s22`` scale the back-action and measurement terms; coherent
    light is s11 = s22 = 1. Vectorized over all arguments.
    """
    n_theta, g, zeta = np.asarray(n_theta), np.asarray(g), np.asarray(zeta)
    total = 2.0 * n_theta + 1.0 + zeta / 2.0 * s11 + g**2 / (2.0 * zeta) * s22
    return total / (1.0 + g)


def classical_cold_damping_temp(cfg: ValidatedConfig) -> float:
    _require_cold_damping(cfg)
    return cfg.theta_m / (1.0 + cfg.g_diss)


def quantum_cold_damping_temp(cfg: ValidatedConfig, classical_limit: bool = False) -> float:
    """Effective temperature (K, or normalized-mode units) of the cooled mirror.

    ``classical_limit`` drops the two light-noise terms, recovering Theta_m/(1+g).
    """
    _require_cold_damping(cfg)
    _require_gain_below_q(cfg)
    g = cfg.g_diss
    light = 0.0 if classical_limit else cfg.zeta / 2.0 + g**2 / (2.0 * cfg.zeta)
    energy = cfg.hbar * cfg.osc.omega_m / 2.0 * (2.0 * cfg.n_theta + 1.0 + light) / (1.0 + g)
    return energy / cfg.kB


def optimal_temperature_value(cfg: ValidatedConfig) -> float:
    """Minimum over zeta of the cooled temperature, reached at zeta = g."""
    g = cfg.g_diss
    return cfg.hbar * cfg.osc.omega_m * (cfg.n_theta / (1.0 + g) + 0.5) / cfg.kB


class OptimalZeta(NamedTuple):
    analytic: float
    numeric: float
    grid_step: float


def optimal_zeta(
    cfg: ValidatedConfig,
    zeta_min: float = 1e-3,
    zeta_max: float = 1e9,
    points: int = 1000,
) -> OptimalZeta:
    """zeta minimizing the cooled temperature, analytic and by brute-force log scan.

    The analytic value for a light state with back-action weight s11 and
    measurement weight s22 is g*sqrt(s22/s11), which is g for coherent light
    and exp(-xi)*g for a phase-squeezed state.
    """
    _require_gain_below_q(cfg)
    if not cfg.feedback.is_cold_damping:
        raise ReactiveFeedbackNotAllowed("optimal_zeta needs pure cold damping")
    lt = cfg.light
    if lt.s12 != 0.0:
        raise ValueError("optimal_zeta handles light states without intensity-phase correlation")
    g = cfg.g_diss
    zetas = np.geomspace(zeta_min, zeta_max, points)
    temps = normalized_temperature(cfg.n_theta, g, zetas, lt.s11, lt.s22)
    step = (zeta_max / zeta_min) ** (1.0 / (points - 1))
    return OptimalZeta(g * math.sqrt(lt.s22 / lt.s11), float(zetas[np.argmin(temps)]), step)


@dataclass(frozen=True)
class TemperatureReport:
    g: float
    zeta: float
    theta_m: float
    theta_fb_classical: float
    theta_fb_quantum: float
    theta_fb_opt: float
    n_theta: float
    n_theta_fb: float
    n_theta_fb_opt: float
    zero_point: float
    classical_below_zero_point: bool

    @property
    def normalized(self) -> dict:
        zp = self.zero_point
        return {
            "theta_m": self.theta_m / zp,
            "theta_fb_classical": self.theta_fb_classical / zp,
            "theta_fb_quantum": self.theta_fb_quantum / zp,
            "theta_fb_opt": self.theta_fb_opt / zp,
        }

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update({f"{k}_normalized": v for k, v in self.normalized.items()})
        return d


def _report(cfg: ValidatedConfig, theta_fb: float, zeta: float) -> TemperatureReport:
    g = cfg.g_diss
    zp = cfg.zero_point_temperature
    theta_cl = classical_cold_damping_temp(cfg)
    return TemperatureReport(
        g=g,
        zeta=zeta,
        theta_m=cfg.theta_m,
        theta_fb_classical=theta_cl,
        theta_fb_quantum=theta_fb,
        theta_fb_opt=optimal_temperature_value(cfg),
        n_theta=cfg.n_theta,
        n_theta_fb=cfg.kB * theta_fb / (cfg.hbar * cfg.osc.omega_m) - 0.5,
        n_theta_fb_opt=cfg.n_theta / (1.0 + g),
        zero_point=zp,
        classical_below_zero_point=theta_cl < zp,
    )


def temperature_report(cfg: ValidatedConfig, classical_limit: bool = False) -> TemperatureReport:
    """All temperatures at the configured (g, zeta)."""
    return _report(cfg, quantum_cold_damping_temp(cfg, classical_limit), cfg.zeta)


def optimal_temperature(cfg: ValidatedConfig) -> TemperatureReport:
    """Report evaluated at the optimal optomechanical parameter zeta = g."""
    _require_cold_damping(cfg)
    return _report(cfg, optimal_temperature_value(cfg), cfg.g_diss)


# --- spectral integration ----------------------------------------------------


def integration_grid(
    cfg: ValidatedConfig, points: int = 20001, tail_points: int = 2001
) -> FrequencyGrid:
    """Positive-frequency grid for variance integration.

    Union of a grid uniform in arctan((Omega - Omega_m)/w), which puts equal
    lorentzian area between neighbours (w is the cooled half-width), and a log
    grid spanning the required coverage so that both wings are sampled.
    """
    wm = cfg.osc.omega_m
    lo, hi = COVERAGE_LOW * wm, COVERAGE_HIGH * wm
    half_width = (1.0 + cfg.g_diss) * cfg.osc.damping / (2.0 * cfg.osc.mass)
    theta = np.linspace(math.atan((lo - wm) / half_width), math.atan((hi - wm) / half_width), points)
    core = wm + half_width * np.tan(theta)
    wings = np.geomspace(lo, hi, tail_points)
    samples = np.unique(np.concatenate([core, wings]))
    samples = samples[(samples >= lo) & (samples <= hi)]
    return FrequencyGrid(samples, "lorentz+log")


def _one_side(w: np.ndarray, v: np.ndarray) -> float:
    """Integral of v over (0, inf) from samples on [w0, wn] plus power-law tails."""
    body = float(np.trapezoid(v, w))
    p_lo = math.log(v[1] / v[0]) / math.log(w[1] / w[0])
    low = v[0] * w[0] / (p_lo + 1.0) if p_lo > -1.0 else 0.0
    p_hi = math.log(v[-1] / v[-2]) / math.log(w[-1] / w[-2])
    if p_hi < -1.0:
        high = v[-1] * w[-1] / (-p_hi - 1.0)
    else:
        warnings.warn(
            f"spectrum decays as Omega**{p_hi:.2f} at the grid edge; tail is not integrable, "
            "returning the band-limited variance",
            stacklevel=3,
        )
        high = 0.0
    return body + low + high


def variance_by_integration(spectrum: Spectrum) -> float:
    """Velocity variance (1/2pi) * integral of sigma_VV over all Omega.

    A positive-only grid is mirrored (sigma_VV is even). Each side must cover
    [Omega_m/50, 50 Omega_m].
    """
    wm = spectrum.cfg.osc.omega_m
    w, v = np.asarray(spectrum.omega), np.asarray(spectrum.values)
    pos, neg = w > 0, w < 0
    sides = []
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if not np.any(mask):
            continue
        ws, vs = sign * w[mask], v[mask]
        order = np.argsort(ws)
        ws, vs = ws[order], vs[order]
        if ws[0] > COVERAGE_LOW * wm * (1 + 1e-9) or ws[-1] < COVERAGE_HIGH * wm * (1 - 1e-9):
            raise InsufficientGridCoverage(
                f"grid covers [{ws[0]:.3g}, {ws[-1]:.3g}] but needs "
                f"[{COVERAGE_LOW * wm:.3g}, {COVERAGE_HIGH * wm:.3g}]"
            )
        sides.append(_one_side(ws, vs))
    if len(sides) == 1:
        sides.append(sides[0])
    return sum(sides) / (2.0 * math.pi)


def equipartition_temperature(spectrum: Spectrum) -> float:
    """Theta such that M * DeltaV**2 = kB * Theta."""
    cfg = spectrum.cfg
    return cfg.osc.mass * variance_by_integration(spectrum) / cfg.kB


# --- sweeps --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    g: float
    zeta: float
    theta_fb_normalized: float
    n_theta_fb: float
    is_optimum: bool


def temperature_sweep(
    n_theta: float, gains: Sequence[float], zetas: Sequence[float], q: float = math.inf
) -> list[SweepRow]:
    """Normalized cooled temperature on a (g, zeta) grid, g-major order.

    ``is_optimum`` flags the grid minimizer in zeta for each gain.
    """
    zetas = np.asarray(zetas, dtype=float)
    rows: list[SweepRow] = []
    for g in gains:
        if g >= q:
            raise GainExceedsQ(f"gain g = {g:.6g} must stay below Q = {q:.6g}")
        t = normalized_temperature(n_theta, g, zetas)
        best = int(np.argmin(t))
        for i, (z, ti) in enumerate(zip(zetas, t)):
            rows.append(SweepRow(float(g), float(z), float(ti), float(ti / 2.0 - 0.5), i == best))
    return rows
