"""Noise added by a linear feedback loop and its Heisenberg limit.

In this module the gain is g = |Z_fb|/H_m (``cfg.g_mod``), which coincides
with the dissipative gain H_fb/H_m only for pure cold damping. Temperatures
of the feedback force use the wide-cavity limit evaluated at Omega_m.

Commutators are handled as per-frequency coefficients of
2*pi*delta(Omega + Omega'); the input quadratures satisfy
[a1[W], a2[W']] = 2i and [a2[W], a1[W']] = -2i in those units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PureReactiveFeedback
from .model import LightState, ValidatedConfig
from .response import _omega, _out, feedback_force_coeffs, total_impedance
from .spectra import added_force_spectrum


@dataclass(frozen=True)
class CommutatorCheck:
    omega: np.ndarray
    coefficient: np.ndarray
    target: np.ndarray
    residual: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual))


def feedback_commutator(cfg: ValidatedConfig, omega):
    """Coefficient of [F_fb_in[Omega], F_fb_in[-Omega]] built from (cA1, cA2)."""
    ca1, ca2 = feedback_force_coeffs(cfg, omega)
    # 2i*(cA1 cA2* - cA2 cA1*) = -4 Im(cA1 cA2*)
    return -4.0 * np.imag(ca1 * np.conj(ca2))


def verify_feedback_commutator(cfg: ValidatedConfig, omega) -> CommutatorCheck:
    """Compare the added-force commutator with its unitarity value 2 hbar Omega H_fb."""
    w = np.atleast_1d(_omega(omega))
    coeff = np.atleast_1d(feedback_commutator(cfg, w))
    target = 2.0 * cfg.hbar * w * cfg.feedback.h_fb
    ca1, ca2 = feedback_force_coeffs(cfg, w)
    scale = np.maximum(np.abs(target), 4.0 * np.abs(ca1) * np.abs(ca2))
    diff = np.abs(coeff - target)
    residual = np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0)
    return CommutatorCheck(w, coeff, target, residual)


def _require_dissipation(cfg: ValidatedConfig) -> None:
    if cfg.feedback.h_fb <= 0:
        raise PureReactiveFeedback(
            "feedback without dissipative part: the noise temperature is only reached "
            "as a limit (infinite squeezing)"
        )


def normalized_feedback_noise_temperature(cfg: ValidatedConfig) -> float:
    """Theta_fb_in in units of hbar Omega_m/(2 kB)."""
    _require_dissipation(cfg)
    h, x = cfg.feedback.h_fb, cfg.feedback.x_fb
    zabs = abs(cfg.zfb)
    g, zeta, lt = cfg.g_mod, cfg.zeta, cfg.light
    return (zabs / h) * (zeta / (2.0 * g) * lt.s11 + g / (2.0 * zeta) * lt.s22) - (x / h) * lt.s12


def feedback_noise_temperature(cfg: ValidatedConfig) -> float:
    """Effective noise temperature of the force added by the feedback loop."""
    return normalized_feedback_noise_temperature(cfg) * cfg.zero_point_temperature


def force_noise_at_resonance(cfg: ValidatedConfig) -> float:
    """sigma_FF of the added force at Omega_m (wide cavity): 2 H_fb kB Theta_fb_in."""
    return 2.0 * cfg.feedback.h_fb * cfg.kB * feedback_noise_temperature(cfg)


def heisenberg_margin(cfg: ValidatedConfig) -> float:
    """sigma_FF / (hbar Omega_m H_fb); the Heisenberg inequality requires >= 1."""
    return force_noise_at_resonance(cfg) / (cfg.hbar * cfg.osc.omega_m * cfg.feedback.h_fb)


def composed_system_temperature(cfg: ValidatedConfig, theta_fb_in: float | None = None) -> float:
    """Damping-weighted mean of the bath and feedback-noise temperatures."""
    hm, hfb = cfg.osc.damping, cfg.feedback.h_fb
    if hfb == 0:
        return cfg.theta_m
    if theta_fb_in is None:
        theta_fb_in = feedback_noise_temperature(cfg)
    return (hm * cfg.theta_m + hfb * theta_fb_in) / (hm + hfb)


@dataclass(frozen=True)
class SqueezingPrescription:
    s11: float
    s22: float
    s12: float
    xi: float
    quadrature_angle: float
    infinite: bool = False

    @property
    def determinant(self) -> float:
        return self.s11 * self.s22 - self.s12**2

    def light_state(self) -> LightState:
        return LightState(self.s11, self.s22, self.s12)


def squeezing_parameters(
    s11: float, s22: float, s12: float, determinant: float | None = None
) -> tuple[float, float]:
    """(xi, angle) of a covariance: smallest eigenvalue exp(-xi), squeezed axis angle mod pi.

    The smallest eigenvalue is taken as determinant/largest eigenvalue, which
    stays accurate for strongly squeezed states; pass ``determinant`` when it
    is known exactly.
    """
    spread = math.hypot(s11 - s22, 2.0 * s12)
    lam_max = 0.5 * (s11 + s22 + spread)
    det = s11 * s22 - s12**2 if determinant is None else determinant
    lam_min = det / lam_max
    major = 0.5 * math.atan2(2.0 * s12, s11 - s22)
    return -math.log(lam_min), (major + math.pi / 2.0) % math.pi


def optimize_squeezing(cfg: ValidatedConfig) -> SqueezingPrescription:
    """Input light state bringing the feedback noise temperature to hbar Omega_m/(2 kB)."""
    _require_dissipation(cfg)
    h, x = cfg.feedback.h_fb, cfg.feedback.x_fb
    ratio = abs(cfg.zfb) / h
    g, zeta = cfg.g_mod, cfg.zeta
    s11, s22, s12 = g / zeta * ratio, zeta / g * ratio, x / h
    # (|Z|^2 - X^2)/H^2 = 1 exactly
    xi, angle = squeezing_parameters(s11, s22, s12, determinant=1.0)
    return SqueezingPrescription(s11, s22, s12, xi, angle)


def output_field_transform(cfg: ValidatedConfig, omega):
    """Coefficients (c_m, c_F) of m_out = c_m m_in + c_F F_fb_in."""
    w = _omega(omega)
    z = total_impedance(cfg.osc, cfg.feedback, w)
    hm = cfg.osc.damping
    c_m = (z - 2.0 * hm) / z
    c_f = np.sqrt(2.0 * hm / (cfg.hbar * np.abs(w))) / z
    return _out(c_m, omega), _out(c_f, omega)


def output_commutator_residual(cfg: ValidatedConfig, omega):
    """|commutator(m_out) - sign(Omega)|, with the added force carrying 2 hbar Omega H_fb."""
    w = _omega(omega)
    c_m, c_f = output_field_transform(cfg, w)
    eps = np.sign(w)
    comm = np.abs(c_m) ** 2 * eps + np.abs(c_f) ** 2 * feedback_commutator(cfg, w)
    return _out(np.abs(comm - eps), omega)


@dataclass(frozen=True)
class FeedbackNoiseReport:
    commutator_coefficient: float
    commutator_target: float
    commutator_residual: float
    sigma_ff: float
    sigma_ff_general: float
    theta_fb_in: float
    theta_fb_in_normalized: float
    heisenberg_margin: float
    theta_fb: float
    g_mod: float
    g_diss: float
    limit: bool = False

    @property
    def commutator_ok(self) -> bool:
        return self.commutator_residual < 1e-10

    @property
    def heisenberg_ok(self) -> bool:
        return self.limit or self.heisenberg_margin >= 1.0 - 1e-12


def noise_report(cfg: ValidatedConfig) -> tuple[FeedbackNoiseReport, SqueezingPrescription]:
    """Commutator check, feedback noise temperature and squeezing prescription at Omega_m.

    Pure reactive feedback yields a ``limit`` report: infinite noise
    temperature and an infinite-squeezing prescription.
    """
    wm = cfg.osc.omega_m
    check = verify_feedback_commutator(cfg, wm)
    sigma_general = float(added_force_spectrum(cfg, wm))
    try:
        t_norm = normalized_feedback_noise_temperature(cfg)
    except PureReactiveFeedback:
        report = FeedbackNoiseReport(
            commutator_coefficient=float(check.coefficient[0]),
            commutator_target=float(check.target[0]),
            commutator_residual=float(check.residual[0]),
            sigma_ff=sigma_general,
            sigma_ff_general=sigma_general,
            theta_fb_in=math.inf,
            theta_fb_in_normalized=math.inf,
            heisenberg_margin=math.inf,
            theta_fb=cfg.theta_m,
            g_mod=cfg.g_mod,
            g_diss=cfg.g_diss,
            limit=True,
        )
        quad = 0.0 if cfg.feedback.x_fb == 0 else math.pi / 4.0
        return report, SqueezingPrescription(math.inf, math.inf, math.inf, math.inf, quad, True)
    theta_in = t_norm * cfg.zero_point_temperature
    report = FeedbackNoiseReport(
        commutator_coefficient=float(check.coefficient[0]),
        commutator_target=float(check.target[0]),
        commutator_residual=float(check.residual[0]),
        sigma_ff=force_noise_at_resonance(cfg),
        sigma_ff_general=sigma_general,
        theta_fb_in=theta_in,
        theta_fb_in_normalized=t_norm,
        heisenberg_margin=heisenberg_margin(cfg),
        theta_fb=composed_system_temperature(cfg, theta_in),
        g_mod=cfg.g_mod,
        g_diss=cfg.g_diss,
    )
    return report, optimize_squeezing(cfg)
