"""Exception and warning types shared across the package.

The CLI maps the three families below onto its exit codes:
``ConfigError`` -> 2, ``PhysicsDomainError`` -> 3, ``NumericalError`` -> 4.
"""


class AtomArrayError(Exception):
    pass


class ConfigError(AtomArrayError, ValueError):
    """Invalid configuration file or schema violation."""


class PhysicsDomainError(AtomArrayError):
    """Parameters outside the regime where the model is defined."""


class MechanicalInstabilityError(PhysicsDomainError):
    pass


class NegativeTemperatureError(PhysicsDomainError):
    pass


class LambDickeError(PhysicsDomainError):
    pass


class NumericalError(AtomArrayError):
    pass


class IntegrationError(NumericalError):
    pass


class NoiseFactorizationError(NumericalError):
    pass


class SaturationWarning(UserWarning):
    """Drive not small compared with the cooperative linewidth."""


class ValidityWarning(UserWarning):
    """Evaluation outside the stated approximation window."""


class SingularSeparationError(AtomArrayError, ValueError):
    """Pair tensor requested at zero separation."""
