"""Second-order environment coefficients from a discretised mode set.

Every coefficient is a mode sum of the time-ordered double integral

    J(alpha, beta) = int_0^dt dt1 int_0^t1 dt2 exp(i alpha t1 + i beta t2),

which equals dt**2 times the second divided difference of exp at the points
(0, i alpha dt, i (alpha + beta) dt). That form stays accurate when any pair of
points nearly coincides, including the resonant case alpha = -beta.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class ModeSet:
    """Environment modes with frequencies ``omega``, couplings ``g`` and ``g_tilde``."""

    omega: np.ndarray
    g: np.ndarray
    g_tilde: np.ndarray

    def __post_init__(self):
        omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        g = np.atleast_1d(np.asarray(self.g, dtype=complex))
        gt = np.atleast_1d(np.asarray(self.g_tilde, dtype=complex))
        if not omega.shape == g.shape == gt.shape or omega.ndim != 1:
            raise DomainError("omega, g and g_tilde must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(g)) and np.all(np.isfinite(gt))):
            raise DomainError("mode data must be finite")
        if np.any(omega <= 0):
            raise DomainError("mode frequencies must be positive")
        if not np.allclose(np.abs(gt), np.abs(g), rtol=1e-12, atol=1e-15):
            raise DomainError("|g_tilde| must equal |g| for every mode")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "g_tilde", gt)

    def __len__(self):
        return self.omega.size

    @classmethod
    def empty(cls) -> "ModeSet":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0))

    @classmethod
    def from_file(cls, path: str | Path) -> "ModeSet":
        """Read whitespace-separated columns: omega, Re g, Im g, Re g~, Im g~.

        Blank lines and ``#`` comments are skipped.
        """
        table = np.loadtxt(path, comments="#", ndmin=2)
        if table.size == 0:
            return cls.empty()
        if table.shape[1] != 5:
            raise DomainError(f"{path}: expected 5 columns, found {table.shape[1]}")
        return cls(table[:, 0], table[:, 1] + 1j * table[:, 2], table[:, 3] + 1j * table[:, 4])

    def scaled(self, factor: float) -> "ModeSet":
        return ModeSet(self.omega, factor * self.g, factor * self.g_tilde)


@dataclass(frozen=True)
class BathCoefficients:
    A: complex
    B: complex
    C: complex
    D: complex
    dt: float
    omega: float

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")


def _phi1(z):
    """(exp(z) - 1) / z, equal to 1 at z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, z)
    series = 1 + z / 2 + z * z / 6 + z**3 / 24
    return np.where(small, series, np.expm1(safe) / safe)


def _exp_divided_difference(a, c):
    """Second divided difference of exp at (0, a, c), elementwise."""
    a = np.asarray(a, dtype=complex)
    c = np.asarray(c, dtype=complex)
    b = c - a
    ma, mb, mc = np.abs(a), np.abs(b), np.abs(c)
    # Divide by the largest of the three point separations.
    via_b = (_phi1(c) - _phi1(a)) / np.where(mb > 0, b, 1.0)
    via_c = (np.exp(a) * _phi1(b) - _phi1(a)) / np.where(mc > 0, c, 1.0)
    via_a = (np.exp(a) * _phi1(b) - _phi1(c)) / np.where(ma > 0, a, 1.0)
    series = 0.5 + (a + c) / 6 + (a * a + a * c + c * c) / 24 + (a**3 + a * a * c + a * c * c + c**3) / 120
    out = np.where(mb >= np.maximum(ma, mc), via_b, np.where(mc >= ma, via_c, via_a))
    return np.where(np.maximum(np.maximum(ma, mb), mc) < SERIES_THRESHOLD, series, out)


def ordered_double_integral(alpha, beta, dt: float):
    """int_0^dt dt1 int_0^t1 dt2 exp(i alpha t1 + i beta t2), vectorised over alpha, beta."""
    a = 1j * np.asarray(alpha, dtype=float) * dt
    c = 1j * (np.asarray(alpha, dtype=float) + np.asarray(beta, dtype=float)) * dt
    return dt * dt * _exp_divided_difference(a, c)


def stationary_kernel(nu, dt: float):
    """int_0^dt dt1 int_0^t1 dt2 exp(i nu (t1 - t2)) = -(exp(i nu dt) - 1 - i nu dt) / nu**2."""
    return ordered_double_integral(nu, -np.asarray(nu, dtype=float), dt)


def coefficients_abcd(modes: ModeSet, omega: float, dt: float) -> BathCoefficients:
    """Mode sums A, B, C, D for system frequency ``omega`` over a step ``dt``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if not np.isfinite(omega) or not np.isfinite(dt):
        raise DomainError("omega and dt must be finite")
    if len(modes) == 0:
        return BathCoefficients(0j, 0j, 0j, 0j, float(dt), float(omega))
    wk, g, gt = modes.omega, modes.g, modes.g_tilde
    minus = omega - wk
    plus = omega + wk
    A = np.sum(g * gt.conj() * ordered_double_integral(minus, -minus, dt))
    B = np.sum(g.conj() * gt * ordered_double_integral(-plus, plus, dt))
    C = np.sum(g * gt * ordered_double_integral(minus, plus, dt))
    D = np.sum(g.conj() * gt.conj() * ordered_double_integral(-plus, -minus, dt))
    coef = BathCoefficients(complex(A), complex(B), complex(C), complex(D), float(dt), float(omega))
    if not all(np.isfinite(x) for x in (coef.A, coef.B, coef.C, coef.D)):
        raise DomainError("non-finite coefficient")
    return coef


def rates_from_coefficients(coef: BathCoefficients) -> tuple[float, float]:
    """(gamma_A, gamma_B) = (2 Re A / dt, 2 Re B / dt)."""
    return 2.0 * coef.A.real / coef.dt, 2.0 * coef.B.real / coef.dt


def f_function(omega: float, dt: float) -> complex:
    """exp(i omega dt) sin(omega dt) / omega, tending to dt as omega -> 0."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    x = omega * dt
    if abs(x) < SERIES_THRESHOLD:
        sin_over_omega = dt * (1 - x * x / 6 + x**4 / 120)
    else:
        sin_over_omega = np.sin(x) / omega
    return complex(np.exp(1j * x) * sin_over_omega)


def tilde_coefficients(coef: BathCoefficients, gamma_c: float | None = None):
    """Emission-branch coefficients (A~, B~, C~, D~).

    With ``gamma_c`` given, C and D are replaced by f gamma_C / 2 and its
    conjugate before forming C~ and D~.
    """
    C, D = coef.C, coef.D
    if gamma_c is not None:
        C = 0.5 * f_function(coef.omega, coef.dt) * gamma_c
        D = C.conjugate()
    phase = np.exp(2j * coef.omega * coef.dt)
    a_t = complex(2.0 * coef.A.real)
    b_t = complex(2.0 * coef.B.real)
    c_t = complex(C.conjugate() + C / phase)
    d_t = complex(D.conjugate() + phase * D)
    return a_t, b_t, c_t, d_t
