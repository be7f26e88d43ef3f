"""Stationary photon emission of a single bosonic system.

Moments: mu1 = <s+ s->, xi1 = i<s-^2 - s+^2>, xi2 = <s-^2 + s+^2>. The rate
functional uses <s- s+> = mu1 + 1, which holds for boson operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoStationaryStateError
from .params import SingleParams


@dataclass(frozen=True)
class SingleMoments:
    mu1: float
    xi1: float
    xi2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mu1, self.xi1, self.xi2])


def moment_system(p: SingleParams) -> tuple[np.ndarray, np.ndarray]:
    """(M, b) with d/dt (mu1, xi1, xi2) = M @ x + b."""
    d = p.net_decay
    w = p.omega
    m = np.array([[-d, 0.0, 0.0], [0.0, -d, 2 * w], [0.0, -2 * w, -d]])
    b = np.array([p.gamma_b, 0.0, -2 * p.gamma_c])
    return m, b


def moment_derivatives(m: SingleMoments, p: SingleParams) -> SingleMoments:
    mat, b = moment_system(p)
    return SingleMoments(*(float(v) for v in mat @ m.as_array() + b))


def _require_stable(p: SingleParams):
    if not p.gamma_a > p.gamma_b:
        raise NoStationaryStateError(
            f"gamma_a={p.gamma_a} must exceed gamma_b={p.gamma_b} for a stationary state"
        )


def stationary_moments(p: SingleParams) -> SingleMoments:
    _require_stable(p)
    d = p.net_decay
    mu1 = p.gamma_b / d
    # -d xi1 + 2w xi2 = 0 and -2w xi1 - d xi2 = 2 gamma_c
    rot = np.array([[-d, 2 * p.omega], [-2 * p.omega, -d]])
    xi1, xi2 = np.linalg.solve(rot, [0.0, 2 * p.gamma_c])
    return SingleMoments(mu1, float(xi1), float(xi2))


def emission_functional(m: SingleMoments, p: SingleParams) -> float:
    """<gamma_A s+s- + gamma_B s-s+ + gamma_C (s+^2 + s-^2)> in terms of the moments."""
    return p.gamma_a * m.mu1 + p.gamma_b * (m.mu1 + 1.0) + p.gamma_c * m.xi2


def stationary_rate_closed_form(p: SingleParams) -> float:
    """Stationary emission rate; negative values are returned as is."""
    _require_stable(p)
    d = p.net_decay
    return 2 * p.gamma_a * p.gamma_b / d - 2 * p.gamma_c**2 * d / (4 * p.omega**2 + d**2)


def single_observables(s_minus: np.ndarray) -> list[np.ndarray]:
    """Operators for (mu1, xi1, xi2) built from a lowering operator."""
    sp = s_minus.conj().T
    sm2, sp2 = s_minus @ s_minus, sp @ sp
    return [sp @ s_minus, 1j * (sm2 - sp2), sm2 + sp2]
