"""Runner for the invariant suite behind ``colddamp check``.

Every check returns a residual together with its tolerance. Randomized checks
draw from ``numpy.random.default_rng(seed)`` so residuals are reproducible.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import qlimits, spectra, thermo
from .errors import ConfigError, DomainError
from .figures import fig2_config
from .model import (
    NORMALIZED,
    SI,
    Bath,
    Cavity,
    Feedback,
    LightState,
    Oscillator,
    ValidatedConfig,
    make_config,
    thermal_phonons,
    validate_config,
)
from .response import (
    feedback_force_coeffs,
    mech_impedance,
    total_impedance,
    velocity_estimator_noise_coeff,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # PASS | FAIL | SKIPPED
    residual: float = float("nan")
    tolerance: float = float("nan")
    detail: str = ""

    def line(self) -> str:
        res = "" if math.isnan(self.residual) else f" residual={self.residual:.3e} tol={self.tolerance:.0e}"
        tail = f" ({self.detail})" if self.detail else ""
        return f"{self.status:7s} {self.name}{res}{tail}"


def _judge(name: str, residual: float, tol: float, detail: str = "") -> CheckResult:
    ok = bool(residual <= tol) and not math.isnan(residual)
    return CheckResult(name, "PASS" if ok else "FAIL", float(residual), tol, detail)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def random_cold_damping_config(rng: np.random.Generator, max_gain_fraction: float = 0.1) -> ValidatedConfig:
    q = 10 ** rng.uniform(3, 7)
    g = rng.uniform(0, max_gain_fraction) * q * 10 ** rng.uniform(-4, 0)
    return make_config(
        q=q, n_theta=10 ** rng.uniform(-2, 6), zeta=10 ** rng.uniform(-2, 5), gain=g
    )


def random_general_config(rng: np.random.Generator) -> ValidatedConfig:
    """Complex feedback, finite cavity bandwidth, arbitrary minimum-or-noisier light."""
    xi, angle = rng.uniform(0, 2), rng.uniform(0, math.pi)
    base = LightState.squeezed(xi, angle)
    excess = 10 ** rng.uniform(0, 1)
    light = LightState(base.s11 * excess, base.s22 * excess, base.s12 * excess)
    return make_config(
        q=10 ** rng.uniform(3, 7),
        n_theta=10 ** rng.uniform(-2, 6),
        zeta=10 ** rng.uniform(-2, 5),
        gain=10 ** rng.uniform(-3, 4),
        reactive_gain=rng.normal() * 10 ** rng.uniform(-3, 4),
        omega_cav=10 ** rng.uniform(-1, 4),
        light=light,
    )


# --- model ----------------------------------------------------------------------


def check_coth_identity(rng) -> CheckResult:
    osc = Oscillator.from_q(1e4)
    worst = 0.0
    for x in 10 ** rng.uniform(-3, 2, 200):  # x = hbar Omega_m / (kB T)
        n = thermal_phonons(Bath(temperature=1.0 / x), osc, NORMALIZED)
        worst = max(worst, abs((n + 0.5) / (0.5 / math.tanh(x / 2.0)) - 1.0))
    return _judge("model.coth_identity", worst, 1e-12)


def check_cavity_round_trip(rng) -> CheckResult:
    worst = 0.0
    for units in ("normalized", "si"):
        const = NORMALIZED if units == "normalized" else SI
        osc = Oscillator(1e-3, 2 * math.pi * 1e6, 1e-3 * 2 * math.pi * 1e6 / 1e6) if units == "si" else Oscillator.from_q(1e6)
        for _ in range(20):
            red = Cavity(zeta=10 ** rng.uniform(-2, 6), omega_cav=osc.omega_m * 10 ** rng.uniform(0, 4))
            back = red.to_physical(osc, const, gamma=10 ** rng.uniform(-6, -2), k0=8e6).to_reduced(osc, const)
            worst = max(worst, _rel(back.zeta, red.zeta), _rel(back.omega_cav, red.omega_cav))
    return _judge("model.parameterization_round_trip", worst, 1e-12)


def si_config() -> ValidatedConfig:
    """A realistic SI configuration: 1 g mirror at 1 MHz with Q = 1e6, 300 K bath."""
    osc = Oscillator(1e-3, 2 * math.pi * 1e6, 1e-3 * 2 * math.pi * 1e6 / 1e6)
    cav = Cavity(gamma=1e-5, tau=2e-11, k0=2 * math.pi / 1.064e-6, alpha0=3e3)
    return validate_config(
        osc, cav, Feedback.from_gain(osc, 300.0), LightState(), Bath(temperature=300.0), units="si"
    )


def check_unit_modes(_rng) -> CheckResult:
    cfg = si_config()
    twin = make_config(q=cfg.q, n_theta=cfg.n_theta, zeta=cfg.zeta, gain=cfg.g_diss)
    a = thermo.quantum_cold_damping_temp(cfg) / cfg.zero_point_temperature
    b = thermo.quantum_cold_damping_temp(twin) / twin.zero_point_temperature
    c = spectra.resonance_noise(cfg) / cfg.quantum_velocity_unit
    d = spectra.resonance_noise(twin) / twin.quantum_velocity_unit
    return _judge("model.normalized_si_consistency", max(_rel(a, b), _rel(c, d)), 1e-9)


# --- response -----------------------------------------------------------------


def check_reality_symmetry(cfg: ValidatedConfig) -> CheckResult:
    w = np.geomspace(1e-2, 1e2, 101) * cfg.osc.omega_m
    worst = 0.0
    for f in (
        lambda x: mech_impedance(cfg.osc, x),
        lambda x: total_impedance(cfg.osc, cfg.feedback, x),
        lambda x: velocity_estimator_noise_coeff(cfg, x),
        lambda x: feedback_force_coeffs(cfg, x)[0],
        lambda x: feedback_force_coeffs(cfg, x)[1],
    ):
        pos, neg = f(w), f(-w)
        worst = max(worst, float(np.max(np.abs(neg - np.conj(pos)) / np.maximum(np.abs(pos), 1e-300))))
    return _judge("response.reality_symmetry", worst, 1e-12)


def check_real_part(cfg: ValidatedConfig) -> CheckResult:
    w = np.geomspace(1e-3, 1e3, 1001) * cfg.osc.omega_m
    res = float(np.max(np.abs(np.real(mech_impedance(cfg.osc, w)) - cfg.osc.damping)))
    return _judge("response.real_part_equals_damping", res, 0.0)


def check_impedance_linearity(cfg: ValidatedConfig, rng) -> CheckResult:
    w = np.geomspace(1e-2, 1e2, 101) * cfg.osc.omega_m
    hm = cfg.osc.damping
    f1 = Feedback(rng.uniform(0, 10) * hm, rng.normal() * hm)
    f2 = Feedback(rng.uniform(0, 10) * hm, rng.normal() * hm)
    f12 = Feedback(f1.h_fb + f2.h_fb, f1.x_fb + f2.x_fb)
    z0 = total_impedance(cfg.osc, Feedback(), w)
    lhs = total_impedance(cfg.osc, f12, w) - z0
    rhs = (total_impedance(cfg.osc, f1, w) - z0) + (total_impedance(cfg.osc, f2, w) - z0)
    scale = np.abs(z0) + np.abs(lhs)
    return _judge("response.impedance_linearity", float(np.max(np.abs(lhs - rhs) / scale)), 1e-12)


# --- spectra ------------------------------------------------------------------


def _flat_ok(cfg: ValidatedConfig) -> Optional[str]:
    if not cfg.feedback.is_cold_damping:
        return "needs cold damping"
    if not cfg.light.is_coherent:
        return "needs coherent light"
    if cfg.g_diss >= cfg.q:
        return f"needs g < Q (g = {cfg.g_diss:.3g}, Q = {cfg.q:.3g})"
    return None


def check_lorentzian(cfg: ValidatedConfig) -> CheckResult:
    name = "spectra.flat_lorentzian"
    why = _flat_ok(cfg)
    if why:
        return CheckResult(name, "SKIPPED", detail=why)
    width = (1 + cfg.g_diss) * cfg.osc.linewidth
    w = cfg.osc.omega_m + np.linspace(-20, 20, 2001) * width
    w = w[w > 0]
    s = spectra.feedback_spectrum_simplified(cfg, w, flat=True)
    prod = np.abs(total_impedance(cfg.osc, cfg.feedback, w)) ** 2 * s
    return _judge(name, float(np.ptp(prod) / np.mean(prod)), 1e-12)


def check_peak_width(cfg: ValidatedConfig) -> CheckResult:
    """peak * FWHM * (1+g) / (2 n + 1 + zeta/2 + g^2/2zeta) does not depend on g."""
    name = "spectra.peak_width_scaling"
    why = _flat_ok(cfg)
    if why:
        return CheckResult(name, "SKIPPED", detail=why)
    values = []
    for g in (0.0, 10.0, 100.0, min(1000.0, cfg.q / 10)):
        c = cfg.replace(fb=Feedback.from_gain(cfg.osc, g))
        width = (1 + g) * c.osc.linewidth
        w = c.osc.omega_m + np.linspace(-5, 5, 20001) * width
        s = spectra.feedback_spectrum_simplified(c, w, flat=True)
        ba, meas = spectra.light_noise_terms(c)
        values.append(s.max() * spectra.fwhm(w, s) * (1 + g) / (2 * c.n_theta + 1 + ba + meas))
    return _judge(name, float(np.ptp(values) / np.mean(values)), 1e-2)


def check_positivity(cfg: ValidatedConfig, rng) -> CheckResult:
    w = np.geomspace(1e-3, 1e3, 2001) * cfg.osc.omega_m
    worst = 0.0 if np.all(spectra.feedback_spectrum_general(cfg, w) > 0) else 1.0
    for _ in range(50):
        c = random_general_config(rng)
        if not np.all(spectra.feedback_spectrum_general(c, w) > 0):
            worst = 1.0
    return _judge("spectra.positivity", worst, 0.0)


def check_resonance_minimizer(rng) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        n, zeta = 10 ** rng.uniform(-1, 4), 10 ** rng.uniform(-1, 3)
        a = 2 * n + 1 + zeta / 2
        g_star = 2 * a * zeta
        f = lambda g: (a + g**2 / (2 * zeta)) / (1 + g) ** 2  # noqa: E731
        gs = np.geomspace(g_star / 10, g_star * 10, 20001)
        worst = max(worst, abs(gs[np.argmin(f(gs))] / g_star - 1))
    return _judge("spectra.resonance_minimizing_gain", worst, 1e-3)


def check_resonance_floor(rng) -> CheckResult:
    worst = -math.inf
    for _ in range(1000):
        c = random_cold_damping_config(rng, max_gain_fraction=1.0)
        worst = max(worst, spectra.resonance_floor(c) / spectra.resonance_noise(c) - 1.0)
    return _judge("spectra.resonance_floor", max(worst, 0.0), 1e-12)


# --- thermo ---------------------------------------------------------------------


def check_classical_limit(cfg: ValidatedConfig) -> CheckResult:
    name = "thermo.classical_limit"
    why = _flat_ok(cfg)
    if why:
        return CheckResult(name, "SKIPPED", detail=why)
    worst = 0.0
    for g in (0.0, 1.0, 10.0, 1e3):
        if g >= cfg.q:
            continue
        c = cfg.replace(fb=Feedback.from_gain(cfg.osc, g))
        worst = max(
            worst,
            _rel(thermo.quantum_cold_damping_temp(c, classical_limit=True), thermo.classical_cold_damping_temp(c)),
        )
    return _judge(name, worst, 1e-12)


def check_floor_law(rng) -> CheckResult:
    n = 10 ** rng.uniform(-2, 6, 1000)
    g = np.concatenate([[0.0], 10 ** rng.uniform(-3, 8, 999)])
    z = 10 ** rng.uniform(-4, 9, 1000)
    t = thermo.normalized_temperature(n, g, z)
    t_opt = 2 * n / (1 + g) + 1
    viol = max(float(np.max(t_opt / t - 1)), float(np.max(1 / t_opt - 1)), 0.0)
    return _judge("thermo.floor_law", viol, 1e-12)


def check_am_gm(rng) -> CheckResult:
    g = 10 ** rng.uniform(-3, 8, 1000)
    eq = g / 2 + g**2 / (2 * g)
    z = 10 ** rng.uniform(-4, 9, 1000)
    ineq = np.min(z / 2 + g**2 / (2 * z) - g)
    res = max(float(np.max(np.abs(eq / g - 1))), max(0.0, -float(ineq / np.max(g))))
    return _judge("thermo.am_gm_optimum", res, 1e-12)


def check_equipartition(cfg: ValidatedConfig, rng) -> list[CheckResult]:
    out = []
    worst = 0.0
    for _ in range(20):
        c = random_cold_damping_config(rng)
        s = spectra.evaluate_spectrum(c, thermo.integration_grid(c), "flat")
        worst = max(worst, _rel(thermo.equipartition_temperature(s), thermo.quantum_cold_damping_temp(c)))
    out.append(_judge("thermo.equipartition_closure_random", worst, 1e-3))

    name = "thermo.equipartition_config"
    if _flat_ok(cfg) is None:
        s = spectra.evaluate_spectrum(cfg, thermo.integration_grid(cfg), "flat")
        res = _rel(thermo.equipartition_temperature(s), thermo.quantum_cold_damping_temp(cfg))
        out.append(_judge(name, res, 1e-3))
    else:
        # outside the flat-formula domain only the band-limited integral is available
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            s = spectra.evaluate_spectrum(cfg, thermo.integration_grid(cfg), "general")
            t = thermo.equipartition_temperature(s)
        ok = math.isfinite(t) and t > 0
        out.append(
            CheckResult(
                name,
                "PASS" if ok else "FAIL",
                detail=f"band-limited Theta/(hbar Omega_m/2kB) = {t / cfg.zero_point_temperature:.6g}, not compared",
            )
        )
    return out


# --- qlimits ------------------------------------------------------------------


def check_heisenberg_floor(rng) -> CheckResult:
    worst = 0.0
    for _ in range(1000):
        c = random_general_config(rng)
        worst = max(worst, 1.0 - qlimits.heisenberg_margin(c))
    return _judge("qlimits.heisenberg_floor", max(worst, 0.0), 1e-12)


def check_composed_vs_quantum(rng) -> CheckResult:
    worst = 0.0
    for _ in range(200):
        c = random_cold_damping_config(rng)
        if c.g_diss == 0:
            continue
        worst = max(worst, _rel(qlimits.composed_system_temperature(c), thermo.quantum_cold_damping_temp(c)))
    return _judge("qlimits.composed_equals_cold_damping", worst, 1e-12)


def check_squeezing_prescriptions(rng) -> CheckResult:
    worst = 0.0
    for _ in range(200):
        c = random_general_config(rng)
        p = qlimits.optimize_squeezing(c)
        fed = c.replace(light=p.light_state())
        scale = max(1.0, p.s11 * p.s22)
        worst = max(worst, abs(p.determinant - 1) / scale, abs(qlimits.heisenberg_margin(fed) - 1) / scale)
    return _judge("qlimits.squeezing_minimum_state", worst, 1e-12, "relative to s11*s22")


def check_commutators(cfg: ValidatedConfig, rng) -> list[CheckResult]:
    w = np.geomspace(1e-2, 1e2, 100) * cfg.osc.omega_m
    worst, spread, unit = 0.0, 0.0, 0.0
    configs = [cfg] + [random_general_config(rng) for _ in range(50)]
    for c in configs:
        ww = w / cfg.osc.omega_m * c.osc.omega_m
        worst = max(worst, qlimits.verify_feedback_commutator(c, ww).max_residual)
        unit = max(unit, float(np.max(qlimits.output_commutator_residual(c, ww))))
        base = qlimits.feedback_commutator(c, ww)
        other = qlimits.feedback_commutator(c.replace(light=LightState.squeezed(1.3, 0.4)), ww)
        spread = max(spread, float(np.max(np.abs(other - base))))
    return [
        _judge("qlimits.feedback_commutator", worst, 1e-10),
        _judge("qlimits.output_field_unitarity", unit, 1e-10),
        _judge("qlimits.commutator_light_independent", spread, 0.0),
    ]


def check_determinism() -> CheckResult:
    from .cli import render_fig3

    a, b = io.StringIO(), io.StringIO()
    render_fig3(a)
    render_fig3(b)
    return _judge("cli.determinism", 0.0 if a.getvalue() == b.getvalue() else 1.0, 0.0)


def run_checks(cfg: Optional[ValidatedConfig] = None, seed: int = 0) -> list[CheckResult]:
    """Run every invariant; ``cfg`` defaults to the g = 100 spectrum-figure configuration."""
    rng = np.random.default_rng(seed)
    cfg = cfg or fig2_config(100.0)
    steps: list[tuple[str, Callable[[], object]]] = [
        ("check_coth_identity", lambda: check_coth_identity(rng)),
        ("check_cavity_round_trip", lambda: check_cavity_round_trip(rng)),
        ("check_unit_modes", lambda: check_unit_modes(rng)),
        ("check_reality_symmetry", lambda: check_reality_symmetry(cfg)),
        ("check_real_part", lambda: check_real_part(cfg)),
        ("check_impedance_linearity", lambda: check_impedance_linearity(cfg, rng)),
        ("check_lorentzian", lambda: check_lorentzian(cfg)),
        ("check_peak_width", lambda: check_peak_width(cfg)),
        ("check_positivity", lambda: check_positivity(cfg, rng)),
        ("check_resonance_minimizer", lambda: check_resonance_minimizer(rng)),
        ("check_resonance_floor", lambda: check_resonance_floor(rng)),
        ("check_classical_limit", lambda: check_classical_limit(cfg)),
        ("check_floor_law", lambda: check_floor_law(rng)),
        ("check_am_gm", lambda: check_am_gm(rng)),
        ("check_equipartition", lambda: check_equipartition(cfg, rng)),
        ("check_heisenberg_floor", lambda: check_heisenberg_floor(rng)),
        ("check_composed_vs_quantum", lambda: check_composed_vs_quantum(rng)),
        ("check_squeezing_prescriptions", lambda: check_squeezing_prescriptions(rng)),
        ("check_commutators", lambda: check_commutators(cfg, rng)),
        ("check_determinism", check_determinism),
    ]
    results: list[CheckResult] = []
    for name, step in steps:
        try:
            r = step()
        except DomainError as exc:
            r = CheckResult(name, "SKIPPED", detail=str(exc))
        except ConfigError as exc:
            r = CheckResult(name, "FAIL", detail=f"configuration rejected: {exc}")
        results.extend(r if isinstance(r, list) else [r])
    return results
