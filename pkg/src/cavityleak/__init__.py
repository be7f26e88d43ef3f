"""Stationary photon emission of undriven cavity/atom systems beyond the rotating-wave approximation."""
from .bath import (
    BathCoefficients,
    ModeSet,
    coefficients_abcd,
    f_function,
    rates_from_coefficients,
    tilde_coefficients,
)
from .composite import (
    MOMENT_NAMES,
    CompositeMoments,
    cavity_rate_closed_form,
    cavity_rate_moments,
    derived_system,
    printed_system,
    regime_check,
    stationary_moments,
)
from .errors import (
    CavityLeakError,
    ConfigError,
    CutoffWarning,
    DegenerateParametersError,
    DimensionError,
    DomainError,
    IntegrationDivergedError,
    NoStationaryStateError,
    NonUniqueSteadyStateError,
    NumericalError,
    PositivityWarning,
    RegimeWarning,
)
from .master import (
    DensityMatrix,
    Generator,
    build_composite_generator,
    build_single_generator,
    emission_rate,
    integrate,
    integrate_samples,
    steady_state,
)
from .operators import DickeBasis, FockSpace, annihilation, creation, tensor_product
from .params import CompositeParams, SingleParams

__version__ = "0.1.0"

__all__ = [
    "BathCoefficients",
    "ModeSet",
    "coefficients_abcd",
    "f_function",
    "rates_from_coefficients",
    "tilde_coefficients",
    "MOMENT_NAMES",
    "CompositeMoments",
    "cavity_rate_closed_form",
    "cavity_rate_moments",
    "derived_system",
    "printed_system",
    "regime_check",
    "stationary_moments",
    "CavityLeakError",
    "ConfigError",
    "CutoffWarning",
    "DegenerateParametersError",
    "DimensionError",
    "DomainError",
    "IntegrationDivergedError",
    "NoStationaryStateError",
    "NonUniqueSteadyStateError",
    "NumericalError",
    "PositivityWarning",
    "RegimeWarning",
    "DensityMatrix",
    "Generator",
    "build_composite_generator",
    "build_single_generator",
    "emission_rate",
    "integrate",
    "integrate_samples",
    "steady_state",
    "DickeBasis",
    "FockSpace",
    "annihilation",
    "creation",
    "tensor_product",
    "CompositeParams",
    "SingleParams",
]
