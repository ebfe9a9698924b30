"""Collective optomechanics of a subwavelength atomic array.

Units throughout: gamma = lambda = hbar = 1, laser wavenumber ``Q = 2*pi``.
"""
from .errors import (AtomArrayError, ConfigError, IntegrationError, LambDickeError,
                     MechanicalInstabilityError, NegativeTemperatureError,
                     NoiseFactorizationError, NumericalError, PhysicsDomainError,
                     SaturationWarning, SingularSeparationError, ValidityWarning)
from .params import (Q, UNITS, ArrayGeometry, DriveProfile, TrapParams, UnitSystem,
                     build_lattice, gaussian_profile, trap_from_depth, trap_from_frequency,
                     uniform_profile)
from .dipole import (CooperativeResponse, cooperative_response, cooperative_shift_width,
                     reflection_coefficient, transmission_coefficient)
from .mechanics import ForceCoefficients, ModeBasis, force_coefficients, normal_modes

__version__ = "0.1.0"
