"""Frequency-response functions of the mirror, the servo loop and the cavity.

Fourier convention: a[Omega] = integral of a(t) exp(+i Omega t) dt, so a time
derivative maps to -i*Omega. Every function accepts a scalar or an array of
angular frequencies and is vectorized over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroFrequency
from .model import Cavity, Feedback, Oscillator, ValidatedConfig


def _omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise ZeroFrequency("Omega = 0 is excluded (free-mass pole of the mechanical impedance)")
    return w


def _out(x: np.ndarray, like):
    x = np.asarray(x)
    return x if np.ndim(like) else x[()]


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing angular frequencies (rad/s), zero excluded."""

    samples: np.ndarray
    spacing: str = "lin"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("grid must be a non-empty 1-D sequence")
        if np.any(np.diff(s) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(s == 0):
            raise ZeroFrequency("grid contains Omega = 0")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @classmethod
    def linear(cls, start: float, stop: float, points: int) -> "FrequencyGrid":
        return cls(np.linspace(start, stop, points), "lin")

    @classmethod
    def logarithmic(cls, start: float, stop: float, points: int) -> "FrequencyGrid":
        if start <= 0 or stop <= 0:
            raise ValueError("log grid needs positive bounds")
        return cls(np.geomspace(start, stop, points), "log")

    @classmethod
    def resonance(
        cls, center: float, scale: float, half_span: float, points: int
    ) -> "FrequencyGrid":
        """Grid dense at ``center``: offsets scale*sinh(u) for uniform u.

        Spacing is about ``scale*du`` near the center and grows in proportion
        to the offset further out, so lorentzians of any width between
        ``scale`` and ``half_span`` get the same relative resolution.
        """
        if half_span >= center:
            raise ValueError("half_span must stay below center to exclude Omega = 0")
        u_max = math.asinh(half_span / scale)
        u = np.linspace(-u_max, u_max, points)
        return cls(center + scale * np.sinh(u), "sinh")

    @classmethod
    def parse(cls, text: str) -> "FrequencyGrid":
        """Parse ``START:STOP:POINTS:lin|log``."""
        try:
            start, stop, points, kind = text.split(":")
            start, stop, n = float(start), float(stop), int(points)
        except ValueError as exc:
            raise ValueError(f"bad grid spec {text!r}, expected START:STOP:POINTS:lin|log") from exc
        if n < 2:
            raise ValueError("grid needs at least 2 points")
        if kind == "lin":
            return cls.linear(start, stop, n)
        if kind == "log":
            return cls.logarithmic(start, stop, n)
        raise ValueError(f"unknown grid spacing {kind!r}")


def mech_impedance(osc: Oscillator, omega):
    """Z_m = M(-i Omega + Omega_m**2/(-i Omega)) + H_m."""
    w = _omega(omega)
    z = osc.damping + 1j * osc.mass * (osc.omega_m**2 / w - w)
    return _out(z, omega)


def feedback_impedance(fb: Feedback, omega):
    """Z_fb at Omega; the reactive part is odd in Omega (real time-domain kernel)."""
    w = np.asarray(omega, dtype=float)
    z = fb.h_fb + 1j * np.sign(w) * fb.x_fb
    return _out(z, omega)


def total_impedance(osc: Oscillator, fb: Feedback, omega):
    return mech_impedance(osc, omega) + feedback_impedance(fb, omega)


def cavity_bandwidth(cav: Cavity) -> float:
    return cav.physical_omega_cav() if cav.is_physical else cav.omega_cav


def cavity_filter(cav: Cavity, omega):
    """Low-pass factor 1/(1 + (Omega/Omega_cav)**2) of the back-action term."""
    w = np.asarray(omega, dtype=float)
    x = w / cavity_bandwidth(cav)
    return _out(1.0 / (1.0 + x * x), omega)


def velocity_estimator_noise_coeff(cfg: ValidatedConfig, omega):
    """Coefficient of a2_in in the estimator error V_hat - V."""
    w = np.asarray(omega, dtype=float)
    cav = cfg.cavity
    if cav.is_physical:
        g, tau, kappa = cav.gamma, cav.tau, cav.kappa
        c = -1j * w * (g + 1j * w * tau) / (2.0 * math.sqrt(2.0 * g) * kappa)
    else:
        # sqrt(gamma)/(2 sqrt(2) kappa) = sqrt(hbar/(2 zeta Omega_m H_m)) using the zeta definition
        amp = math.sqrt(cfg.hbar / (2.0 * cfg.zeta * cfg.osc.omega_m * cfg.osc.damping))
        c = -1j * w * (1.0 + 1j * w / cfg.omega_cav) * amp
    return _out(c, omega)


def backaction_coeff(cfg: ValidatedConfig, omega):
    """Coefficient of a1_in in the radiation-pressure force on the mirror."""
    w = np.asarray(omega, dtype=float)
    cav = cfg.cavity
    if cav.is_physical:
        g, tau = cav.gamma, cav.tau
        c = math.sqrt(2.0 * g) / (g - 1j * w * tau) * cfg.hbar * cav.kappa
    else:
        amp = math.sqrt(cfg.hbar * cfg.zeta * cfg.osc.omega_m * cfg.osc.damping / 2.0)
        c = amp / (1.0 - 1j * w / cfg.omega_cav)
    return _out(np.asarray(c, dtype=complex), omega)


def feedback_force_coeffs(cfg: ValidatedConfig, omega):
    """(cA1, cA2) such that the added feedback force is cA1*a1_in + cA2*a2_in."""
    w = _omega(omega)
    ca1 = backaction_coeff(cfg, w)
    ca2 = -velocity_estimator_noise_coeff(cfg, w) * feedback_impedance(cfg.feedback, w)
    return _out(ca1, omega), _out(ca2, omega)
