"""Parameter records. Units: hbar = 1, every rate and frequency in the same angular unit."""
from __future__ import annotations

from dataclasses import dataclass
from math import isfinite, sqrt

from .errors import DomainError


def _finite(**values):
    for name, v in values.items():
        if not isfinite(v):
            raise DomainError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class SingleParams:
    """Rates and shifted frequency of a single bosonic system."""

    gamma_a: float
    gamma_b: float
    gamma_c: float
    omega: float

    def __post_init__(self):
        _finite(gamma_a=self.gamma_a, gamma_b=self.gamma_b, gamma_c=self.gamma_c, omega=self.omega)
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise DomainError("gamma_a and gamma_b must be non-negative")

    @property
    def net_decay(self) -> float:
        return self.gamma_a - self.gamma_b


@dataclass(frozen=True)
class CompositeParams:
    """Cavity mode coupled to the collective mode of ``n_atoms`` atoms.

    ``zeta`` = kappa + N Gamma is derived on access.
    """

    omega_c: float
    omega_0: float
    kappa: float
    gamma: float
    n_atoms: int
    g_c: float

    def __post_init__(self):
        _finite(omega_c=self.omega_c, omega_0=self.omega_0, kappa=self.kappa, gamma=self.gamma, g_c=self.g_c)
        if self.omega_c <= 0 or self.omega_0 <= 0:
            raise DomainError("omega_c and omega_0 must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise DomainError("kappa and gamma must be non-negative")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise DomainError(f"n_atoms must be an integer >= 1, got {self.n_atoms}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))

    @property
    def collective_decay(self) -> float:
        return self.n_atoms * self.gamma

    @property
    def collective_coupling(self) -> float:
        return sqrt(self.n_atoms) * self.g_c

    @property
    def zeta(self) -> float:
        return self.kappa + self.n_atoms * self.gamma
