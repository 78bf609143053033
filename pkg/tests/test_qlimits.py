import math

import numpy as np
import pytest
from conftest import draw_general
from hypothesis import given, settings
from hypothesis import strategies as st

from colddamp import errors, qlimits, thermo
from colddamp.model import LightState, make_config

W = np.geomspace(1e-2, 1e2, 100)


def cfg_for(zeta, gain, reactive=0.0, light=LightState(), **kw):
    return make_config(q=kw.pop("q", 1e6), n_theta=kw.pop("n_theta", 10.0), zeta=zeta, gain=gain,
                       reactive_gain=reactive, light=light, **kw)


# --- commutators ------------------------------------------------------------------


@pytest.mark.parametrize("g, zeta", [(1.0, 1.0), (10.0, 0.1), (1e4, 3e2), (0.01, 1e3)])
def test_cold_damping_commutator(g, zeta):
    check = qlimits.verify_feedback_commutator(cfg_for(zeta, g, omega_cav=50.0), W)
    assert check.max_residual < 1e-10
    np.testing.assert_allclose(check.coefficient, 2 * W * g * 1e-6, rtol=1e-10)


def test_open_loop_commutator_vanishes():
    check = qlimits.verify_feedback_commutator(cfg_for(1.0, 0.0), W)
    assert np.all(check.coefficient == 0) and check.max_residual == 0


def test_only_dissipative_part_enters_commutator():
    # Z_fb = (1 + 2i) H_m
    cfg = cfg_for(1.0, 1.0, reactive=2.0, omega_cav=10.0)
    np.testing.assert_allclose(qlimits.feedback_commutator(cfg, W), 2 * W * cfg.osc.damping, rtol=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_commutator_independent_of_light(seed):
    rng = np.random.default_rng(seed)
    cfg = draw_general(rng)
    other = cfg.replace(light=LightState.squeezed(rng.uniform(0, 3), rng.uniform(0, math.pi)))
    np.testing.assert_array_equal(qlimits.feedback_commutator(cfg, W), qlimits.feedback_commutator(other, W))
    assert qlimits.verify_feedback_commutator(cfg, W).max_residual < 1e-10


# --- noise temperatures -------------------------------------------------------------


def test_noise_temperature_at_zeta_equal_gain():
    assert qlimits.normalized_feedback_noise_temperature(cfg_for(30.0, 30.0)) == pytest.approx(1.0, rel=1e-15)


def test_noise_temperature_at_four_times_gain():
    assert qlimits.normalized_feedback_noise_temperature(cfg_for(40.0, 10.0)) == pytest.approx(2.125, rel=1e-15)
    assert qlimits.heisenberg_margin(cfg_for(40.0, 10.0)) == pytest.approx(2.125, rel=1e-14)


def test_complex_feedback_with_coherent_light_exceeds_floor():
    cfg = cfg_for(math.hypot(3.0, 4.0), 3.0, reactive=4.0)
    assert qlimits.normalized_feedback_noise_temperature(cfg) == pytest.approx(5.0 / 3.0, rel=1e-14)


def test_pure_reactive_feedback():
    cfg = cfg_for(1.0, 0.0, reactive=3.0)
    with pytest.raises(errors.PureReactiveFeedback):
        qlimits.feedback_noise_temperature(cfg)
    with pytest.raises(errors.PureReactiveFeedback):
        qlimits.optimize_squeezing(cfg)
    report, presc = qlimits.noise_report(cfg)
    assert report.limit and math.isinf(report.theta_fb_in) and presc.infinite
    assert presc.quadrature_angle == pytest.approx(math.pi / 4)


def test_noise_temperature_units():
    cfg = cfg_for(4.0, 2.0)
    assert qlimits.feedback_noise_temperature(cfg) == pytest.approx(
        qlimits.normalized_feedback_noise_temperature(cfg) * cfg.zero_point_temperature)


@settings(max_examples=300)
@given(st.integers(0, 2**32 - 1))
def test_heisenberg_floor(seed):
    cfg = draw_general(np.random.default_rng(seed))
    assert qlimits.normalized_feedback_noise_temperature(cfg) >= 1 - 1e-12
    assert qlimits.heisenberg_margin(cfg) >= 1 - 1e-12


def test_composed_temperature_limits():
    cfg = cfg_for(2.0, 5.0)
    assert qlimits.composed_system_temperature(cfg, theta_fb_in=cfg.theta_m) == pytest.approx(cfg.theta_m)
    assert qlimits.composed_system_temperature(cfg_for(2.0, 0.0)) == cfg_for(2.0, 0.0).theta_m


def test_composed_matches_cold_damping_formula():
    cfg = make_config(q=1e6, n_theta=1e5, zeta=1e3, gain=1e3)
    assert qlimits.composed_system_temperature(cfg) == pytest.approx(thermo.quantum_cold_damping_temp(cfg), rel=1e-12)


@settings(max_examples=200)
@given(st.floats(1e-3, 1e5), st.floats(-3, 6), st.floats(0, 6))
def test_composed_matches_cold_damping_everywhere(g, log_zeta, log_n):
    cfg = make_config(q=1e9, n_theta=10**log_n - 1, zeta=10**log_zeta, gain=g)
    assert qlimits.composed_system_temperature(cfg) == pytest.approx(thermo.quantum_cold_damping_temp(cfg), rel=1e-12)


# --- squeezing -------------------------------------------------------------------


def test_coherent_prescription_at_optimum():
    p = qlimits.optimize_squeezing(cfg_for(7.0, 7.0))
    assert (p.s11, p.s22, p.s12) == pytest.approx((1.0, 1.0, 0.0))
    assert p.xi == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_phase_squeezed_prescription(xi):
    g = 100.0
    p = qlimits.optimize_squeezing(cfg_for(math.exp(-xi) * g, g))
    assert p.s11 == pytest.approx(math.exp(xi), rel=1e-12)
    assert p.s22 == pytest.approx(math.exp(-xi), rel=1e-12)
    assert p.s12 == 0.0
    assert p.xi == pytest.approx(xi, rel=1e-12)
    assert p.quadrature_angle == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("x", [-5.0, -0.3, 0.3, 5.0])
def test_rotated_prescription(x):
    # zeta = g with g = |Z_fb|/H_m and H_fb = H_m
    cfg = cfg_for(math.hypot(1.0, x), 1.0, reactive=x)
    p = qlimits.optimize_squeezing(cfg)
    assert math.exp(-p.xi) == pytest.approx(math.hypot(1.0, x) - abs(x), rel=1e-12)
    assert p.quadrature_angle == pytest.approx(math.pi / 4 if x < 0 else 3 * math.pi / 4)
    # the same state written as a rotated squeezed state
    s = LightState.squeezed(p.xi, p.quadrature_angle)
    assert (s.s11, s.s22, s.s12) == pytest.approx((p.s11, p.s22, p.s12), rel=1e-12)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_prescription_closes_to_floor(seed):
    cfg = draw_general(np.random.default_rng(seed))
    p = qlimits.optimize_squeezing(cfg)
    scale = max(1.0, p.s11 * p.s22)
    assert abs(p.determinant - 1) <= 1e-12 * scale
    fed = cfg.replace(light=p.light_state())
    assert abs(qlimits.normalized_feedback_noise_temperature(fed) - 1) <= 1e-12 * scale


def test_squeezing_parameters_of_known_state():
    s = LightState.squeezed(1.3, 0.4)
    xi, angle = qlimits.squeezing_parameters(s.s11, s.s22, s.s12)
    assert xi == pytest.approx(1.3, rel=1e-12)
    assert angle == pytest.approx(0.4, rel=1e-12)


# --- output field ---------------------------------------------------------------


def test_output_reflection_without_feedback():
    c_m, _ = qlimits.output_field_transform(cfg_for(1.0, 0.0), 1.0)
    assert c_m == pytest.approx(-1.0)


def test_output_transparent_at_large_gain():
    c_m, c_f = qlimits.output_field_transform(cfg_for(1.0, 1e12, q=1e15), 1.0)
    assert c_m == pytest.approx(1.0, abs=1e-11)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_output_field_unitarity(seed):
    cfg = draw_general(np.random.default_rng(seed))
    w = np.concatenate([-W[::-1], W])
    assert np.max(qlimits.output_commutator_residual(cfg, w)) < 1e-10


def test_noise_report_fields():
    cfg = cfg_for(3.0, 2.0, reactive=1.0, omega_cav=1e4)
    report, presc = qlimits.noise_report(cfg)
    assert report.commutator_ok and report.heisenberg_ok
    assert report.g_mod == pytest.approx(math.sqrt(5.0))
    assert report.g_diss == pytest.approx(2.0)
    assert report.sigma_ff_general == pytest.approx(report.sigma_ff, rel=1e-6)
    assert presc.determinant == pytest.approx(1.0, rel=1e-12)
