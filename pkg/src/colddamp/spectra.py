"""Symmetrized (two-sided) velocity noise spectra.

Variants:

``free``        free oscillator, no light and no feedback
``general``     full expression, any light state, complex feedback, cavity filtering
``simplified``  cold damping, coherent light, wide cavity; measurement noise grows as Omega**2
``flat``        as ``simplified`` with Omega -> Omega_m in the measurement term, which makes
                the spectrum an exact lorentzian of width (1+g) H_m/M (requires g < Q)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import DomainError, GainExceedsQ, ReactiveFeedbackNotAllowed
from .model import ValidatedConfig
from .response import (
    FrequencyGrid,
    _omega,
    _out,
    feedback_force_coeffs,
    mech_impedance,
    total_impedance,
)

VARIANTS = ("free", "general", "simplified", "flat")
DB_REFERENCE = "10*log10(sigma_vv / (hbar*Omega_m/H_m))"


def thermal_force_spectrum(cfg: ValidatedConfig, omega, white_noise: bool | None = None):
    """2 hbar |Omega| H_m sigma_mm, the bath Langevin-force spectrum.

    In white-noise mode Omega is replaced by Omega_m, giving 2 H_m kB Theta_m.
    """
    white = cfg.white_noise if white_noise is None else white_noise
    w = np.abs(np.asarray(omega, dtype=float))
    hm = cfg.osc.damping
    if white:
        return _out(np.full_like(w, 2.0 * hm * cfg.kB * cfg.theta_m), omega)
    if cfg.temperature == 0:
        coth = np.ones_like(w)
    else:
        coth = 1.0 / np.tanh(cfg.hbar * w / (2.0 * cfg.kB * cfg.temperature))
    return _out(cfg.hbar * w * hm * coth, omega)


def free_spectrum(cfg: ValidatedConfig, omega, white_noise: bool | None = None):
    w = _omega(omega)
    z2 = np.abs(mech_impedance(cfg.osc, w)) ** 2
    return _out(thermal_force_spectrum(cfg, w, white_noise) / z2, omega)


def added_force_spectrum(cfg: ValidatedConfig, omega):
    """Spectrum of the force added by the light (back action plus fed-back measurement noise)."""
    w = _omega(omega)
    ca1, ca2 = feedback_force_coeffs(cfg, w)
    lt = cfg.light
    s = (
        np.abs(ca1) ** 2 * lt.s11
        + np.abs(ca2) ** 2 * lt.s22
        + 2.0 * np.real(ca1 * np.conj(ca2)) * lt.s12
    )
    return _out(s, omega)


def feedback_spectrum_general(cfg: ValidatedConfig, omega):
    w = _omega(omega)
    z2 = np.abs(total_impedance(cfg.osc, cfg.feedback, w)) ** 2
    num = thermal_force_spectrum(cfg, w) + added_force_spectrum(cfg, w)
    return _out(num / z2, omega)


def _require_cold_damping(cfg: ValidatedConfig) -> None:
    if not cfg.feedback.is_cold_damping:
        raise ReactiveFeedbackNotAllowed(
            "this formula needs pure cold damping (Im Z_fb = 0); use the general variant"
        )
    if not cfg.light.is_coherent:
        raise DomainError("this formula assumes coherent light; use the general variant")


def _require_gain_below_q(cfg: ValidatedConfig) -> None:
    if cfg.g_diss >= cfg.q:
        raise GainExceedsQ(
            f"gain g = {cfg.g_diss:.6g} must stay below Q = {cfg.q:.6g} for the flat-spectrum formulas"
        )


def light_noise_terms(cfg: ValidatedConfig) -> tuple[float, float]:
    """(zeta/2, g**2/(2 zeta)): back-action and measurement noise in units of hbar Omega_m H_m."""
    return cfg.zeta / 2.0, cfg.g_diss**2 / (2.0 * cfg.zeta)


def feedback_spectrum_simplified(cfg: ValidatedConfig, omega, flat: bool = False):
    """Cold-damping spectrum in the wide-cavity limit.

    With ``flat=True`` the measurement-noise term is frozen at Omega_m and the
    numerator is frequency independent.
    """
    _require_cold_damping(cfg)
    if flat:
        _require_gain_below_q(cfg)
    if cfg.omega_cav < 10.0 * cfg.osc.omega_m:
        warnings.warn(
            f"cavity bandwidth {cfg.omega_cav:.3g} < 10 Omega_m; wide-cavity formula is inaccurate",
            stacklevel=2,
        )
    w = _omega(omega)
    ba, meas = light_noise_terms(cfg)
    shape = np.ones_like(w) if flat else (w / cfg.osc.omega_m) ** 2
    unit = cfg.hbar * cfg.osc.omega_m * cfg.osc.damping
    num = unit * (2.0 * cfg.n_theta + 1.0 + ba + meas * shape)
    z2 = np.abs(total_impedance(cfg.osc, cfg.feedback, w)) ** 2
    return _out(num / z2, omega)


def resonance_noise(cfg: ValidatedConfig) -> float:
    """sigma_VV at Omega_m for cold damping with coherent light and a wide cavity."""
    _require_cold_damping(cfg)
    g = cfg.g_diss
    ba, meas = light_noise_terms(cfg)
    return cfg.quantum_velocity_unit * (2.0 * cfg.n_theta + 1.0 + ba + meas) / (1.0 + g) ** 2


def resonance_floor(cfg: ValidatedConfig) -> float:
    """hbar Omega_m / (H_m + H_fb): zero-point noise of a damped oscillator with the same response."""
    return cfg.hbar * cfg.osc.omega_m / (cfg.osc.damping + cfg.feedback.h_fb)


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    values: np.ndarray
    variant: str
    cfg: ValidatedConfig = field(repr=False)
    flags: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return self.cfg.digest()

    @property
    def db(self) -> np.ndarray:
        return 10.0 * np.log10(self.values / self.cfg.quantum_velocity_unit)

    def one_sided(self) -> "Spectrum":
        keep = self.omega > 0
        flags = dict(self.flags, one_sided=True)
        return Spectrum(self.omega[keep], 2.0 * self.values[keep], self.variant, self.cfg, flags)

    def to_csv(self, fh: TextIO, db: bool = False, comments: Iterable[str] = ()) -> None:
        write_spectrum_csv(fh, [(None, self)], db=db, comments=comments)


def evaluate_spectrum(cfg: ValidatedConfig, grid: FrequencyGrid, variant: str = "general") -> Spectrum:
    w = grid.samples
    flags = {"white_noise": cfg.white_noise, "grid": grid.spacing}
    if variant == "free":
        vals = free_spectrum(cfg, w)
    elif variant == "general":
        vals = feedback_spectrum_general(cfg, w)
        flags["cavity_filtering"] = math.isfinite(cfg.omega_cav)
    elif variant == "simplified":
        vals = feedback_spectrum_simplified(cfg, w)
        flags.update(white_noise=True, wide_cavity=True)
    elif variant == "flat":
        vals = feedback_spectrum_simplified(cfg, w, flat=True)
        flags.update(white_noise=True, wide_cavity=True, flat_numerator=True)
    else:
        raise ValueError(f"unknown spectrum variant {variant!r}; expected one of {VARIANTS}")
    return Spectrum(np.array(w), np.asarray(vals, dtype=float), variant, cfg, flags)


def fwhm(omega: np.ndarray, values: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked sampled curve (linear interpolation)."""
    i = int(np.argmax(values))
    half = values[i] / 2.0
    left = np.nonzero(values[:i] < half)[0]
    right = np.nonzero(values[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise ValueError("peak is not resolved: half maximum not reached on both sides")
    j = left[-1]
    k = i + right[0]
    x_left = np.interp(half, [values[j], values[j + 1]], [omega[j], omega[j + 1]])
    x_right = np.interp(half, [values[k], values[k - 1]], [omega[k], omega[k - 1]])
    return float(x_right - x_left)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_spectrum_csv(
    fh: TextIO,
    curves: list[tuple[str | None, Spectrum]],
    db: bool = False,
    comments: Iterable[str] = (),
) -> None:
    """Write one or several spectra; a ``curve`` column is added when curves are labelled."""
    labelled = any(label is not None for label, _ in curves)
    one_sided = any(s.flags.get("one_sided") for _, s in curves)
    for line in comments:
        fh.write(f"# {line}\n")
    if db:
        fh.write(f"# sigma_vv_db = {DB_REFERENCE}\n")
    if one_sided:
        fh.write("# one-sided spectrum: 2*sigma_vv over Omega > 0\n")
    cols = ["omega", "sigma_vv_one_sided" if one_sided else "sigma_vv"]
    if db:
        cols.append("sigma_vv_db")
    if labelled:
        cols.insert(0, "curve")
    fh.write(",".join(cols) + "\n")
    for label, spec in curves:
        dbv = spec.db if db else None
        for i, (w, v) in enumerate(zip(spec.omega, spec.values)):
            row = [_fmt(w), _fmt(v)]
            if db:
                row.append(_fmt(dbv[i]))
            if labelled:
                row.insert(0, str(label))
            fh.write(",".join(row) + "\n")
