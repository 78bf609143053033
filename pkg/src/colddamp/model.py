"""Physical parameters, unit modes and configuration validation.

Two unit modes are supported. ``si`` uses CODATA values for hbar and kB;
``normalized`` sets hbar = kB = 1 and, by convention, M = Omega_m = 1 so that
every output is directly expressed in the dimensionless scales used for the
figure presets.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .errors import (
    AntiDamping,
    ConfigError,
    GammaOutOfRange,
    InconsistentParameterization,
    NeedsPhysicalCavity,
    NonPositiveParameter,
    UncertaintyViolation,
    UnknownKey,
)

# relative tolerance used to decide whether two parameterizations agree
CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class Constants:
    hbar: float
    kB: float


SI = Constants(hbar=1.054571817e-34, kB=1.380649e-23)
NORMALIZED = Constants(hbar=1.0, kB=1.0)


def constants_for(units: str) -> Constants:
    if units == "si":
        return SI
    if units == "normalized":
        return NORMALIZED
    raise ConfigError(f"unknown unit mode {units!r} (expected 'si' or 'normalized')")


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or math.isnan(value):
        raise NonPositiveParameter(f"{name} must be > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class Oscillator:
    """Single-mode mechanical oscillator: mass (kg), resonance (rad/s), damping (kg/s)."""

    mass: float
    omega_m: float
    damping: float

    @classmethod
    def from_q(cls, q: float, mass: float = 1.0, omega_m: float = 1.0) -> "Oscillator":
        return cls(mass=mass, omega_m=omega_m, damping=mass * omega_m / q)

    @property
    def q(self) -> float:
        return self.mass * self.omega_m / self.damping

    @property
    def linewidth(self) -> float:
        """Full width at half maximum of the free velocity spectrum, H_m/M."""
        return self.damping / self.mass


@dataclass(frozen=True)
class Cavity:
    """Optical transducer.

    Either the physical set (gamma, tau, k0, alpha0) or the reduced set
    (zeta, omega_cav) must be complete. ``omega_cav`` may be ``math.inf`` in
    the reduced form, meaning the cavity filtering is ignored entirely.
    """

    gamma: Optional[float] = None
    tau: Optional[float] = None
    k0: Optional[float] = None
    alpha0: Optional[float] = None
    zeta: Optional[float] = None
    omega_cav: Optional[float] = None

    @property
    def is_physical(self) -> bool:
        return None not in (self.gamma, self.tau, self.k0, self.alpha0)

    @property
    def is_reduced(self) -> bool:
        return self.zeta is not None and self.omega_cav is not None

    @property
    def kappa(self) -> float:
        if not self.is_physical:
            raise NeedsPhysicalCavity("kappa is only defined for the physical cavity form")
        return 2.0 * self.k0 * self.alpha0

    def physical_omega_cav(self) -> float:
        return self.gamma / self.tau

    def physical_zeta(self, osc: Oscillator, constants: Constants) -> float:
        return 4.0 * constants.hbar * self.kappa**2 / (self.gamma * osc.omega_m * osc.damping)

    def to_physical(
        self, osc: Oscillator, constants: Constants, gamma: float = 1e-5, k0: float = 1.0
    ) -> "Cavity":
        """Physical form matching this reduced cavity.

        gamma and k0 are free choices: only kappa**2/gamma and gamma/tau are
        fixed by (zeta, omega_cav).
        """
        if not self.is_reduced:
            raise ConfigError("to_physical needs a reduced cavity (zeta, omega_cav)")
        if not math.isfinite(self.omega_cav):
            raise ConfigError("an infinite cavity bandwidth has no physical form")
        kappa = math.sqrt(self.zeta * gamma * osc.omega_m * osc.damping / (4.0 * constants.hbar))
        return Cavity(gamma=gamma, tau=gamma / self.omega_cav, k0=k0, alpha0=kappa / (2.0 * k0))

    def to_reduced(self, osc: Oscillator, constants: Constants) -> "Cavity":
        if self.is_reduced:
            return Cavity(zeta=self.zeta, omega_cav=self.omega_cav)
        return Cavity(zeta=self.physical_zeta(osc, constants), omega_cav=self.physical_omega_cav())


@dataclass(frozen=True)
class Feedback:
    """Frequency-independent servo impedance Z_fb = h_fb + i x_fb (kg/s).

    The value applies to positive frequencies; negative frequencies use the
    complex conjugate so that the feedback kernel is real in the time domain.
    """

    h_fb: float = 0.0
    x_fb: float = 0.0

    @classmethod
    def from_gain(cls, osc: Oscillator, gain: float, reactive_gain: float = 0.0) -> "Feedback":
        return cls(h_fb=gain * osc.damping, x_fb=reactive_gain * osc.damping)

    @property
    def zfb(self) -> complex:
        return complex(self.h_fb, self.x_fb)

    @property
    def is_cold_damping(self) -> bool:
        return self.x_fb == 0.0


@dataclass(frozen=True)
class LightState:
    """Symmetrized covariances of the input amplitude (1) and phase (2) quadratures."""

    s11: float = 1.0
    s22: float = 1.0
    s12: float = 0.0

    @classmethod
    def coherent(cls) -> "LightState":
        return cls(1.0, 1.0, 0.0)

    @classmethod
    def squeezed(cls, xi: float, angle: float) -> "LightState":
        """Minimum state whose quadrature at ``angle`` (from a1) is squeezed by e**-xi."""
        c, s = math.cos(angle), math.sin(angle)
        lo, hi = math.exp(-xi), math.exp(xi)
        return cls(
            s11=lo * c * c + hi * s * s,
            s22=lo * s * s + hi * c * c,
            s12=(lo - hi) * c * s,
        )

    @property
    def determinant(self) -> float:
        return self.s11 * self.s22 - self.s12**2

    @property
    def is_coherent(self) -> bool:
        return (self.s11, self.s22, self.s12) == (1.0, 1.0, 0.0)


@dataclass(frozen=True)
class Bath:
    """Mechanical bath, given by temperature (K) and/or thermal phonon number."""

    temperature: Optional[float] = None
    n_theta: Optional[float] = None
    white_noise: bool = True


def bose_occupation(x: float) -> float:
    """1/(exp(x) - 1) with x = hbar*Omega/(kB*T); very cold baths give 0."""
    if x > 700.0:  # exp overflows; the occupation is below 1e-304
        return 0.0
    return 1.0 / math.expm1(x)


def thermal_phonons(bath: Bath, osc: Oscillator, constants: Constants = SI) -> float:
    """Thermal phonon number of the bath at the mechanical resonance."""
    if bath.temperature is None:
        if bath.n_theta is None:
            raise ConfigError("bath needs 'temperature' or 'n_theta'")
        return float(bath.n_theta)
    T = float(bath.temperature)
    if T < 0:
        raise NonPositiveParameter(f"bath temperature must be >= 0, got {T}")
    if T == 0:
        return 0.0
    return bose_occupation(constants.hbar * osc.omega_m / (constants.kB * T))


def temperature_from_phonons(n_theta: float, osc: Oscillator, constants: Constants) -> float:
    if n_theta == 0:
        return 0.0
    return constants.hbar * osc.omega_m / (constants.kB * math.log1p(1.0 / n_theta))


@dataclass(frozen=True)
class ValidatedConfig:
    """Fully derived, immutable configuration consumed by every computation."""

    osc: Oscillator
    cavity: Cavity
    feedback: Feedback
    light: LightState
    bath: Bath
    units: str
    constants: Constants
    zeta: float
    omega_cav: float
    q: float
    g_diss: float
    g_mod: float
    n_theta: float
    temperature: float
    theta_m: float
    kappa: Optional[float] = None
    white_noise: bool = True
    source: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def hbar(self) -> float:
        return self.constants.hbar

    @property
    def kB(self) -> float:
        return self.constants.kB

    @property
    def zfb(self) -> complex:
        return self.feedback.zfb

    @property
    def zero_point_temperature(self) -> float:
        """hbar*Omega_m/(2 kB), the normalization unit for temperatures."""
        return self.hbar * self.osc.omega_m / (2.0 * self.kB)

    @property
    def quantum_velocity_unit(self) -> float:
        """hbar*Omega_m/H_m, the zero-temperature free resonance velocity noise."""
        return self.hbar * self.osc.omega_m / self.osc.damping

    def to_dict(self) -> dict:
        """Canonical, JSON-serializable description (reduced cavity form)."""
        return {
            "units": self.units,
            "oscillator": {
                "mass": self.osc.mass,
                "omega_m": self.osc.omega_m,
                "damping": self.osc.damping,
            },
            "cavity": {"zeta": self.zeta, "omega_cav": _json_float(self.omega_cav)},
            "feedback": {"h_fb": self.feedback.h_fb, "x_fb": self.feedback.x_fb},
            "light": {"s11": self.light.s11, "s22": self.light.s22, "s12": self.light.s12},
            "bath": {"n_theta": self.n_theta, "white_noise": self.white_noise},
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes: Any) -> "ValidatedConfig":
        """Re-validate with some of (osc, cavity, feedback, light, bath) swapped."""
        parts = dict(
            osc=self.osc,
            cav=self.cavity,
            fb=self.feedback,
            light=self.light,
            bath=dataclasses.replace(self.bath, white_noise=self.white_noise),
        )
        parts.update(changes)
        return validate_config(units=self.units, **parts)


def _json_float(x: float):
    return x if math.isfinite(x) else "inf"


def _close(a: float, b: float, rtol: float = CONSISTENCY_RTOL) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)


def validate_config(
    osc: Oscillator,
    cav: Cavity,
    fb: Feedback = Feedback(),
    light: LightState = LightState(),
    bath: Bath = Bath(n_theta=0.0),
    units: str = "normalized",
) -> ValidatedConfig:
    """Check every invariant and derive (kappa, zeta, omega_cav, Q, gains, n_theta, Theta_m)."""
    constants = constants_for(units)
    _positive("oscillator.mass", osc.mass)
    _positive("oscillator.omega_m", osc.omega_m)
    _positive("oscillator.damping", osc.damping)
    q = osc.q
    if q < 100:
        warnings.warn(
            f"quality factor Q = {q:.3g} < 100; narrow-resonance approximations are poor",
            stacklevel=2,
        )

    if not (cav.is_physical or cav.is_reduced):
        raise ConfigError("cavity needs either (gamma, tau, k0, alpha0) or (zeta, omega_cav)")
    kappa = None
    if cav.is_physical:
        if not 0 < cav.gamma < 1:
            raise GammaOutOfRange(f"cavity gamma must lie in (0, 1), got {cav.gamma}")
        _positive("cavity.tau", cav.tau)
        _positive("cavity.k0", cav.k0)
        _positive("cavity.alpha0", cav.alpha0)
        kappa = cav.kappa
        zeta = cav.physical_zeta(osc, constants)
        omega_cav = cav.physical_omega_cav()
        if cav.is_reduced and not (
            _close(zeta, cav.zeta) and _close(omega_cav, cav.omega_cav)
        ):
            raise InconsistentParameterization(
                f"physical cavity gives zeta={zeta!r}, omega_cav={omega_cav!r}; "
                f"reduced form states zeta={cav.zeta!r}, omega_cav={cav.omega_cav!r}"
            )
    else:
        zeta = _positive("cavity.zeta", cav.zeta)
        omega_cav = _positive("cavity.omega_cav", cav.omega_cav)

    if fb.h_fb < 0:
        raise AntiDamping(f"feedback dissipative part must be >= 0, got {fb.h_fb}")

    if light.s11 <= 0 or light.s22 <= 0:
        raise UncertaintyViolation("light covariances s11 and s22 must be positive")
    # slack proportional to s11*s22: minimal states built from large ratios lose
    # absolute precision in the difference s11*s22 - s12**2
    if light.determinant < 1.0 - 1e-12 * max(1.0, light.s11 * light.s22):
        raise UncertaintyViolation(
            f"s11*s22 - s12**2 = {light.determinant!r} < 1 violates the Heisenberg inequality"
        )

    if bath.n_theta is not None:
        n_theta = float(bath.n_theta)
        if n_theta < 0:
            raise NonPositiveParameter(f"bath n_theta must be >= 0, got {n_theta}")
        if bath.temperature is not None:
            n_from_t = thermal_phonons(Bath(temperature=bath.temperature), osc, constants)
            if not math.isclose(n_from_t, n_theta, rel_tol=CONSISTENCY_RTOL, abs_tol=1e-300):
                raise InconsistentParameterization(
                    f"bath temperature implies n_theta={n_from_t!r}, config states {n_theta!r}"
                )
        temperature = temperature_from_phonons(n_theta, osc, constants)
    else:
        n_theta = thermal_phonons(bath, osc, constants)
        temperature = float(bath.temperature)
    theta_m = constants.hbar * osc.omega_m * (n_theta + 0.5) / constants.kB

    return ValidatedConfig(
        osc=osc,
        cavity=cav,
        feedback=fb,
        light=light,
        bath=bath,
        units=units,
        constants=constants,
        zeta=zeta,
        omega_cav=omega_cav,
        q=q,
        g_diss=fb.h_fb / osc.damping,
        g_mod=abs(fb.zfb) / osc.damping,
        n_theta=n_theta,
        temperature=temperature,
        theta_m=theta_m,
        kappa=kappa,
        white_noise=bath.white_noise,
    )


def make_config(
    *,
    q: float,
    n_theta: float,
    zeta: float,
    gain: float = 0.0,
    reactive_gain: float = 0.0,
    omega_cav: float = math.inf,
    light: LightState = LightState(),
    white_noise: bool = True,
) -> ValidatedConfig:
    """Normalized-mode configuration (hbar = kB = M = Omega_m = 1) from dimensionless inputs."""
    osc = Oscillator.from_q(q)
    return validate_config(
        osc,
        Cavity(zeta=zeta, omega_cav=omega_cav),
        Feedback.from_gain(osc, gain, reactive_gain),
        light,
        Bath(n_theta=n_theta, white_noise=white_noise),
        units="normalized",
    )


# --- structured key-value configuration files -------------------------------

_SECTION_KEYS = {
    "oscillator": {"mass", "omega_m", "damping", "q"},
    "cavity": {"gamma", "tau", "k0", "alpha0", "zeta", "omega_cav"},
    "feedback": {"h_fb", "x_fb", "gain", "reactive_gain"},
    "light": {"s11", "s22", "s12", "squeeze", "squeeze_angle"},
    "bath": {"temperature", "n_theta", "white_noise"},
}
_TOP_KEYS = {"units"} | set(_SECTION_KEYS)


def _num(x: Any) -> float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ConfigError(f"expected a number, got {x!r}")
    try:
        return float(x)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {x!r}") from exc


def config_from_dict(data: Mapping[str, Any], units: Optional[str] = None) -> ValidatedConfig:
    """Build and validate a configuration from its JSON object model.

    Unknown keys are rejected. ``units`` overrides the file's ``units`` entry.
    """
    if not isinstance(data, Mapping):
        raise ConfigError("configuration must be a key-value object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise UnknownKey(f"unknown top-level keys: {sorted(unknown)}")
    for section, allowed in _SECTION_KEYS.items():
        extra = set(data.get(section) or {}) - allowed
        if extra:
            raise UnknownKey(f"unknown keys in {section!r}: {sorted(extra)}")

    units = units or data.get("units", "normalized")
    constants_for(units)

    o = data.get("oscillator") or {}
    default_unit = 1.0 if units == "normalized" else None
    mass = o.get("mass", default_unit)
    omega_m = o.get("omega_m", default_unit)
    if mass is None or omega_m is None:
        raise ConfigError("oscillator needs 'mass' and 'omega_m' in si units")
    mass, omega_m = _num(mass), _num(omega_m)
    if "damping" in o and "q" in o:
        osc = Oscillator(mass, omega_m, _num(o["damping"]))
        if not _close(osc.q, _num(o["q"])):
            raise InconsistentParameterization("oscillator 'damping' and 'q' disagree")
    elif "damping" in o:
        osc = Oscillator(mass, omega_m, _num(o["damping"]))
    elif "q" in o:
        osc = Oscillator.from_q(_num(o["q"]), mass, omega_m)
    else:
        raise ConfigError("oscillator needs 'damping' or 'q'")

    c = data.get("cavity") or {}
    cav = Cavity(**{k: _num(v) for k, v in c.items()})

    f = data.get("feedback") or {}
    if ("h_fb" in f or "x_fb" in f) and ("gain" in f or "reactive_gain" in f):
        raise ConfigError("feedback: give either (h_fb, x_fb) or (gain, reactive_gain)")
    if "gain" in f or "reactive_gain" in f:
        fb = Feedback.from_gain(osc, _num(f.get("gain", 0.0)), _num(f.get("reactive_gain", 0.0)))
    else:
        fb = Feedback(_num(f.get("h_fb", 0.0)), _num(f.get("x_fb", 0.0)))

    lt = data.get("light") or {}
    if "squeeze" in lt:
        if {"s11", "s22", "s12"} & set(lt):
            raise ConfigError("light: give either covariances or (squeeze, squeeze_angle)")
        light = LightState.squeezed(_num(lt["squeeze"]), _num(lt.get("squeeze_angle", 0.0)))
    else:
        light = LightState(
            _num(lt.get("s11", 1.0)), _num(lt.get("s22", 1.0)), _num(lt.get("s12", 0.0))
        )

    b = data.get("bath") or {}
    white = b.get("white_noise", True)
    if not isinstance(white, bool):
        raise ConfigError("bath.white_noise must be true or false")
    bath = Bath(
        temperature=None if "temperature" not in b else _num(b["temperature"]),
        n_theta=None if "n_theta" not in b else _num(b["n_theta"]),
        white_noise=white,
    )
    if bath.temperature is None and bath.n_theta is None:
        raise ConfigError("bath needs 'temperature' or 'n_theta'")

    cfg = validate_config(osc, cav, fb, light, bath, units=units)
    return dataclasses.replace(cfg, source=dict(data))


def load_config(path, units: Optional[str] = None) -> ValidatedConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(data, units=units)
