"""Exception hierarchy.

``ConfigError`` subclasses mean the input configuration is invalid.
``DomainError`` subclasses mean a valid configuration was pushed outside the
validity domain of a particular approximation or formula.
"""


class ColdDampError(Exception):
    pass


class ConfigError(ColdDampError, ValueError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class GammaOutOfRange(ConfigError):
    pass


class AntiDamping(ConfigError):
    pass


class UncertaintyViolation(ConfigError):
    pass


class InconsistentParameterization(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class DomainError(ColdDampError, ValueError):
    pass


class ZeroFrequency(DomainError):
    pass


class GainExceedsQ(DomainError):
    pass


class ReactiveFeedbackNotAllowed(DomainError):
    pass


class NeedsPhysicalCavity(DomainError):
    pass


class PureReactiveFeedback(DomainError):
    pass


class InsufficientGridCoverage(DomainError):
    pass
