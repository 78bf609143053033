"""Quantum and thermal noise of a cold-damped mirror read out by a high-finesse cavity."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    Bath,
    Cavity,
    Constants,
    Feedback,
    LightState,
    Oscillator,
    ValidatedConfig,
    config_from_dict,
    load_config,
    make_config,
    thermal_phonons,
    validate_config,
)
