import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from colddamp import errors, spectra
from colddamp.model import Bath, Cavity, LightState, Oscillator, make_config, validate_config
from colddamp.response import FrequencyGrid, mech_impedance, total_impedance


def fig2(g, **kw):
    return make_config(q=1e6, n_theta=1e5, zeta=1.0, gain=g, **kw)


# --- free oscillator ------------------------------------------------------------


def test_free_peak_white_noise():
    cfg = fig2(0.0)
    assert spectra.free_spectrum(cfg, 1.0) == pytest.approx(2 * cfg.theta_m / cfg.osc.damping, rel=1e-14)
    # in units of hbar Omega_m / H_m the peak is 2 n + 1
    assert spectra.free_spectrum(cfg, 1.0) / cfg.quantum_velocity_unit == pytest.approx(2e5 + 1, rel=1e-14)


def test_free_zero_temperature_exact_mode():
    osc = Oscillator.from_q(1e4)
    cfg = validate_config(osc, Cavity(zeta=1.0, omega_cav=math.inf), bath=Bath(temperature=0.0, white_noise=False))
    w = np.array([-2.0, 0.5, 1.0, 3.0])
    expected = np.abs(w) * osc.damping / np.abs(mech_impedance(osc, w)) ** 2
    np.testing.assert_allclose(spectra.free_spectrum(cfg, w), expected, rtol=1e-14)


def test_exact_mode_matches_white_noise_at_resonance():
    osc = Oscillator.from_q(1e4)
    cav = Cavity(zeta=1.0, omega_cav=math.inf)
    white = validate_config(osc, cav, bath=Bath(temperature=3.0))
    exact = validate_config(osc, cav, bath=Bath(temperature=3.0, white_noise=False))
    assert spectra.free_spectrum(exact, 1.0) == pytest.approx(spectra.free_spectrum(white, 1.0), rel=1e-14)
    assert spectra.free_spectrum(exact, 2.0) != pytest.approx(spectra.free_spectrum(white, 2.0), rel=1e-6)


# --- general spectrum ---------------------------------------------------------


def test_general_reduces_to_simplified_below_cavity_bandwidth():
    cfg = fig2(100.0, omega_cav=1e6)
    w = np.linspace(0.5, 2.0, 301)
    np.testing.assert_allclose(
        spectra.feedback_spectrum_general(cfg, w), spectra.feedback_spectrum_simplified(cfg, w), rtol=1e-9
    )


def test_general_open_loop_without_light_is_free():
    cfg = make_config(q=1e5, n_theta=10.0, zeta=1e-14, gain=0.0)
    w = np.geomspace(0.1, 10, 51)
    np.testing.assert_allclose(spectra.feedback_spectrum_general(cfg, w), spectra.free_spectrum(cfg, w), rtol=1e-12)


def test_correlated_light_lowers_noise_with_positive_reactance():
    base = make_config(q=1e5, n_theta=0.0, zeta=1.0, gain=10.0, reactive_gain=5.0)
    corr = base.replace(light=LightState(2.0, 2.0, 1.0))
    plain = base.replace(light=LightState(2.0, 2.0, 0.0))
    assert spectra.feedback_spectrum_general(corr, 1.0) < spectra.feedback_spectrum_general(plain, 1.0)


def test_general_vs_simplified_with_finite_cavity():
    cfg = fig2(100.0, omega_cav=1e3)
    grid = FrequencyGrid.linear(0.9, 1.1, 2001)
    a = spectra.evaluate_spectrum(cfg, grid, "general").values
    b = spectra.evaluate_spectrum(cfg, grid, "simplified").values
    assert np.max(np.abs(a / b - 1)) < 1e-5


# --- simplified and flat spectra -------------------------------------------------


def test_unfed_curve_peak():
    assert spectra.resonance_noise(fig2(0.0)) / fig2(0.0).quantum_velocity_unit == pytest.approx(2e5 + 1.5)
    s = spectra.feedback_spectrum_simplified(fig2(0.0), 1.0, flat=True)
    assert s / fig2(0.0).quantum_velocity_unit == pytest.approx(2e5 + 1.5, rel=1e-14)


def test_width_ratio_for_gain_ten():
    grid = FrequencyGrid.resonance(1.0, 1e-8, 0.01, 20001)
    w0 = spectra.fwhm(grid.samples, spectra.evaluate_spectrum(fig2(0.0), grid, "flat").values)
    w10 = spectra.fwhm(grid.samples, spectra.evaluate_spectrum(fig2(10.0), grid, "flat").values)
    assert w10 / w0 == pytest.approx(11.0, rel=0.01)
    assert w0 == pytest.approx(1e-6, rel=0.01)


def test_large_gain_limit_is_measurement_noise():
    zeta = 2.0
    cfg = make_config(q=1e14, n_theta=1e5, zeta=zeta, gain=1e12)
    assert spectra.resonance_noise(cfg) / cfg.quantum_velocity_unit == pytest.approx(1 / (2 * zeta), rel=1e-5)


def test_resonance_noise_examples():
    cfg = make_config(q=1e6, n_theta=0.0, zeta=1e-12, gain=0.0)
    assert spectra.resonance_noise(cfg) / cfg.quantum_velocity_unit == pytest.approx(1.0, rel=1e-11)
    cfg = make_config(q=1e6, n_theta=0.0, zeta=100.0, gain=100.0)
    assert spectra.resonance_noise(cfg) / cfg.quantum_velocity_unit == pytest.approx(1 / 101, rel=1e-14)


def test_simplified_preconditions():
    with pytest.raises(errors.ReactiveFeedbackNotAllowed):
        spectra.feedback_spectrum_simplified(make_config(q=1e6, n_theta=0, zeta=1, gain=1, reactive_gain=1), 1.0)
    with pytest.raises(errors.DomainError):
        spectra.feedback_spectrum_simplified(fig2(1.0, light=LightState.squeezed(1.0, 0.0)), 1.0)
    with pytest.raises(errors.GainExceedsQ):
        spectra.feedback_spectrum_simplified(make_config(q=1e3, n_theta=0, zeta=1, gain=2e3), 1.0, flat=True)
    with pytest.warns(UserWarning, match="cavity bandwidth"):
        spectra.feedback_spectrum_simplified(fig2(1.0, omega_cav=5.0), 1.0)


@settings(max_examples=50)
@given(st.floats(0, 1e5), st.floats(-2, 5), st.floats(0, 6), st.floats(4, 8))
def test_flat_spectrum_is_lorentzian(g, log_zeta, log_n, log_q):
    cfg = make_config(q=10**log_q, n_theta=10**log_n - 1, zeta=10**log_zeta, gain=min(g, 0.5 * 10**log_q))
    w = np.geomspace(0.2, 5.0, 301)
    prod = np.abs(total_impedance(cfg.osc, cfg.feedback, w)) ** 2 * spectra.feedback_spectrum_simplified(cfg, w, True)
    assert np.ptp(prod) / np.mean(prod) < 1e-12


def test_peak_width_scaling():
    # peak * FWHM * (1+g) / (2n + 1 + zeta/2 + g^2/2zeta) = hbar Omega_m / M for every g
    grid = FrequencyGrid.resonance(1.0, 1e-8, 0.1, 40001)
    values = []
    for g in (0.0, 3.0, 30.0, 300.0, 3000.0):
        cfg = make_config(q=1e6, n_theta=1e3, zeta=5.0, gain=g)
        s = spectra.evaluate_spectrum(cfg, grid, "flat").values
        k = 2e3 + 1 + 2.5 + g**2 / 10.0
        values.append(s.max() * spectra.fwhm(grid.samples, s) * (1 + g) / k)
    np.testing.assert_allclose(values, 1.0, rtol=1e-2)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_positivity(seed):
    from conftest import draw_general

    cfg = draw_general(np.random.default_rng(seed))
    w = np.concatenate([-np.geomspace(1e2, 1e-2, 50), np.geomspace(1e-2, 1e2, 50)])
    assert np.all(spectra.feedback_spectrum_general(cfg, w) > 0)
    assert np.all(spectra.free_spectrum(cfg, w) > 0)


@pytest.mark.parametrize("n, zeta", [(0.0, 1.0), (1e3, 0.1), (1e5, 10.0), (10.0, 1e3)])
def test_resonance_minimizing_gain(n, zeta):
    def sigma(log_g):
        cfg = make_config(q=1e15, n_theta=n, zeta=zeta, gain=10**log_g)
        return spectra.resonance_noise(cfg)

    best = minimize_scalar(sigma, bounds=(-3, 12), method="bounded", options={"xatol": 1e-10})
    analytic = 2 * (2 * n + 1 + zeta / 2) * zeta
    assert 10**best.x == pytest.approx(analytic, rel=1e-3)


@settings(max_examples=200)
@given(st.floats(0, 1e6), st.floats(-2, 6), st.floats(0, 6))
def test_resonance_floor(g, log_zeta, log_n):
    cfg = make_config(q=1e12, n_theta=10**log_n - 1, zeta=10**log_zeta, gain=g)
    assert spectra.resonance_noise(cfg) >= spectra.resonance_floor(cfg) * (1 - 1e-12)


# --- evaluate_spectrum and output -------------------------------------------------


def test_symmetric_grid_gives_even_spectrum():
    cfg = make_config(q=1e4, n_theta=3.0, zeta=2.0, gain=5.0, reactive_gain=2.0, omega_cav=20.0,
                      light=LightState.squeezed(0.7, 0.4))
    half = np.geomspace(0.1, 10, 101)
    grid = FrequencyGrid(np.concatenate([-half[::-1], half]))
    v = spectra.evaluate_spectrum(cfg, grid, "general").values
    np.testing.assert_allclose(v[:101][::-1], v[101:], rtol=1e-12)


def test_free_variant_matches_general_without_light():
    cfg = make_config(q=1e4, n_theta=3.0, zeta=1e-14)
    grid = FrequencyGrid.logarithmic(0.1, 10, 101)
    np.testing.assert_allclose(
        spectra.evaluate_spectrum(cfg, grid, "free").values,
        spectra.evaluate_spectrum(cfg, grid, "general").values,
        rtol=1e-12,
    )


def test_free_variant_width():
    cfg = make_config(q=1e4, n_theta=3.0, zeta=1.0)
    grid = FrequencyGrid.resonance(1.0, 1e-6, 0.1, 20001)
    s = spectra.evaluate_spectrum(cfg, grid, "free")
    assert spectra.fwhm(s.omega, s.values) == pytest.approx(cfg.osc.linewidth, rel=1e-3)


def test_unknown_variant():
    with pytest.raises(ValueError):
        spectra.evaluate_spectrum(fig2(1.0), FrequencyGrid.linear(0.5, 1.5, 3), "magic")


def test_csv_layout():
    cfg = fig2(10.0)
    s = spectra.evaluate_spectrum(cfg, FrequencyGrid.linear(0.99, 1.01, 3), "flat")
    buf = io.StringIO()
    s.to_csv(buf, db=True, comments=["hello"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# hello"
    header = [ln for ln in lines if not ln.startswith("#")]
    assert header[0] == "omega,sigma_vv,sigma_vv_db"
    omega, value, db = header[2].split(",")
    assert float(omega) == 1.0 and float(value) == s.values[1]
    assert float(db) == pytest.approx(10 * math.log10(s.values[1] / cfg.quantum_velocity_unit))
    assert "\r" not in buf.getvalue()


def test_one_sided_output_is_labelled():
    cfg = fig2(10.0)
    s = spectra.evaluate_spectrum(cfg, FrequencyGrid(np.array([-1.0, 1.0, 1.001])), "flat").one_sided()
    np.testing.assert_array_equal(s.omega, [1.0, 1.001])
    buf = io.StringIO()
    s.to_csv(buf)
    assert "omega,sigma_vv_one_sided" in buf.getvalue().splitlines()
    assert s.values[0] == 2 * spectra.feedback_spectrum_simplified(cfg, 1.0, flat=True)


def test_fwhm_needs_resolved_peak():
    w = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        spectra.fwhm(w, np.ones_like(w))
