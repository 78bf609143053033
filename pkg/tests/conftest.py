import math

import numpy as np
import pytest

from colddamp.model import LightState, make_config

# lines reported by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def draw_cold_damping(rng, max_gain_fraction=0.1):
    """Normalized cold-damping config with g < max_gain_fraction * Q."""
    q = 10 ** rng.uniform(3, 7)
    return make_config(
        q=q,
        n_theta=10 ** rng.uniform(-2, 6),
        zeta=10 ** rng.uniform(-2, 5),
        gain=rng.uniform(0, max_gain_fraction) * q * 10 ** rng.uniform(-4, 0),
    )


def draw_general(rng):
    """Complex Z_fb, finite cavity and a squeezed, possibly impure, light state."""
    xi, angle = rng.uniform(0, 2.5), rng.uniform(0, math.pi)
    base = LightState.squeezed(xi, angle)
    excess = 10 ** rng.uniform(0, 1)
    return make_config(
        q=10 ** rng.uniform(3, 7),
        n_theta=10 ** rng.uniform(-2, 6),
        zeta=10 ** rng.uniform(-2, 5),
        gain=10 ** rng.uniform(-3, 4),
        reactive_gain=rng.normal() * 10 ** rng.uniform(-3, 3),
        omega_cav=10 ** rng.uniform(-1, 4),
        light=LightState(base.s11 * excess, base.s22 * excess, base.s12 * excess),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
