"""Exception and warning types raised across the package."""


class CavityLeakError(Exception):
    """Base class for all package errors."""


class ConfigError(CavityLeakError):
    """Bad configuration key, value or combination."""


class DomainError(CavityLeakError, ValueError):
    """Argument outside the domain of a function."""


class DimensionError(CavityLeakError, ValueError):
    """Operator shapes mismatch or a product space exceeds the size guard."""


class NumericalError(CavityLeakError):
    """A numerical procedure failed."""


class IntegrationDivergedError(NumericalError):
    pass


class NoStationaryStateError(NumericalError):
    pass


class NonUniqueSteadyStateError(NumericalError):
    pass


class DegenerateParametersError(NumericalError):
    pass


class CutoffWarning(UserWarning):
    """Population reached the top level of a truncated ladder."""


class PositivityWarning(UserWarning):
    """A density matrix acquired eigenvalues below the PSD tolerance."""


class RegimeWarning(UserWarning):
    """Parameters lie outside the validity regime of a closed form."""
