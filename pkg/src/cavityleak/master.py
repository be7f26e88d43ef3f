"""Master-equation generators, one-step subensemble maps, time stepping and steady states.

A generator acts as

    d rho/dt = -i (H_cond rho - rho H_cond^dag) + sum_k rate_k L_k rho R_k^dag

with a non-Hermitian conditional Hamiltonian ``H_cond`` and jump terms
``(rate, L, R)``. With hbar = 1, rates and frequencies share units.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import _kernels
from .bath import BathCoefficients, f_function
from .errors import (
    CutoffWarning,
    DimensionError,
    DomainError,
    IntegrationDivergedError,
    NonUniqueSteadyStateError,
    PositivityWarning,
)
from .operators import FockSpace, annihilation, identity, tensor_product
from .params import CompositeParams, SingleParams

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-10
CUTOFF_POPULATION_TOL = 1e-6
# Largest Hilbert-space dimension for the dense Liouvillian solve.
MAX_DENSE_DIM = 60


class DensityMatrix:
    """Hermitian, unit-trace state on a truncated space.

    ``check=False`` skips validation; used for outputs of maps that are not
    guaranteed positive, which are monitored separately.
    """

    def __init__(self, entries, check: bool = True):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        if check:
            if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise DomainError("density matrix is not Hermitian")
            if abs(np.trace(m) - 1) > TRACE_TOL:
                raise DomainError(f"density matrix trace {np.trace(m).real:.3e} != 1")
            if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -PSD_TOL:
                raise DomainError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        self.entries = m

    @classmethod
    def from_state(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, dim: int, n: int) -> "DensityMatrix":
        m = np.zeros((dim, dim), dtype=complex)
        m[n, n] = 1.0
        return cls(m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expect(self, op) -> complex:
        return complex(np.trace(op @ self.entries))

    def min_eigenvalue(self) -> float:
        m = self.entries
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class Jump(NamedTuple):
    """Jump term rate * left @ rho @ right^dag."""

    rate: float
    left: np.ndarray
    right: np.ndarray
    label: str


@dataclass(frozen=True, eq=False)
class Generator:
    h_cond: np.ndarray
    jumps: tuple[Jump, ...]
    dims: tuple[int, ...]
    ops: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.h_cond.shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = -1j * (self.h_cond @ rho - rho @ self.h_cond.conj().T)
        for j in self.jumps:
            out = out + j.rate * (j.left @ rho @ j.right.conj().T)
        return out

    def adjoint(self, op) -> np.ndarray:
        """Heisenberg-picture action: Tr(op L(rho)) = Tr(adjoint(op) rho)."""
        op = np.asarray(op, dtype=complex)
        h = self.h_cond
        out = 1j * (h.conj().T @ op - op @ h)
        for j in self.jumps:
            out = out + j.rate * (j.right.conj().T @ op @ j.left)
        return out

    def trace_derivative(self, rho) -> complex:
        return complex(np.trace(self.apply(rho)))

    def liouvillian(self) -> np.ndarray:
        """Matrix of the generator on row-major vec(rho)."""
        d = self.dim
        eye = np.eye(d, dtype=complex)
        sup = -1j * (np.kron(self.h_cond, eye) - np.kron(eye, self.h_cond.conj()))
        for j in self.jumps:
            sup += j.rate * np.kron(j.left, j.right.conj())
        return sup

    def kernel_arrays(self):
        d = self.dim
        if self.jumps:
            lefts = np.ascontiguousarray(np.stack([j.left for j in self.jumps]))
            rights = np.ascontiguousarray(np.stack([j.right.conj().T for j in self.jumps]))
            rates = np.array([j.rate for j in self.jumps], dtype=complex)
        else:
            lefts = np.zeros((0, d, d), dtype=complex)
            rights = np.zeros((0, d, d), dtype=complex)
            rates = np.zeros(0, dtype=complex)
        return np.ascontiguousarray(self.h_cond, dtype=complex), lefts, rights, rates


def build_single_generator(params: SingleParams, space: FockSpace) -> Generator:
    s_minus = annihilation(space)
    s_plus = s_minus.conj().T
    ga, gb, gc = params.gamma_a, params.gamma_b, params.gamma_c
    squeeze = s_plus @ s_plus + s_minus @ s_minus
    h_cond = params.omega * s_plus @ s_minus - 0.5j * (ga * s_plus @ s_minus + gb * s_minus @ s_plus + gc * squeeze)
    jumps = (
        Jump(ga, s_minus, s_minus, "gamma_a"),
        Jump(gb, s_plus, s_plus, "gamma_b"),
        Jump(gc, s_minus, s_plus, "gamma_c"),
        Jump(gc, s_plus, s_minus, "gamma_c"),
    )
    return Generator(h_cond, jumps, (space.dim,), {"s_minus": s_minus, "s_plus": s_plus})


def build_composite_generator(
    params: CompositeParams,
    cav: FockSpace,
    atom_ladder: FockSpace | None = None,
    *,
    as_printed: bool = False,
    max_dim: int | None = None,
) -> Generator:
    """Cavity (x) collective-atom generator with counter-rotating coupling.

    The atomic recycling term is N Gamma S- rho S+. ``as_printed=True``
    swaps it for N Gamma S+ rho S-, which does not conserve the trace; it
    exists only to reproduce that failure.
    """
    atom_ladder = cav if atom_ladder is None else atom_ladder
    c = tensor_product(annihilation(cav), identity(atom_ladder.dim), max_dim)
    s = tensor_product(identity(cav.dim), annihilation(atom_ladder), max_dim)
    cd, sd = c.conj().T, s.conj().T
    kappa, n_gamma = params.kappa, params.collective_decay
    h_cond = (
        (params.omega_c - 0.5j * kappa) * cd @ c
        + (params.omega_0 - 0.5j * n_gamma) * sd @ s
        + params.collective_coupling * (c + cd) @ (sd + s)
    )
    atom_op = sd if as_printed else s
    jumps = (Jump(kappa, c, c, "cavity"), Jump(n_gamma, atom_op, atom_op, "atom"))
    return Generator(h_cond, jumps, (cav.dim, atom_ladder.dim), {"c": c, "S": s})


class EmissionRate(NamedTuple):
    total: float
    channels: dict


def emission_rate(rho, gen: Generator) -> EmissionRate:
    """Tr R(rho), with the contribution of each jump label."""
    rho = np.asarray(rho, dtype=complex)
    channels: dict[str, float] = {}
    for j in gen.jumps:
        val = j.rate * np.trace(j.left @ rho @ j.right.conj().T).real
        channels[j.label] = channels.get(j.label, 0.0) + float(val)
    return EmissionRate(float(sum(channels.values())), channels)


def top_level_populations(rho, dims) -> list[float]:
    """Population of the highest retained level of each tensor factor."""
    diag = np.real(np.diagonal(np.asarray(rho))).reshape(dims)
    out = []
    for axis in range(len(dims)):
        other = tuple(i for i in range(len(dims)) if i != axis)
        out.append(float(diag.sum(axis=other)[-1]) if other else float(diag[-1]))
    return out


def _check_cutoff(rho, dims) -> None:
    tops = top_level_populations(rho, dims)
    if max(tops) > CUTOFF_POPULATION_TOL:
        warnings.warn(f"top-level populations {tops} exceed {CUTOFF_POPULATION_TOL}", CutoffWarning, stacklevel=3)


def integrate_samples(gen: Generator, rho0, t_final: float, n_samples: int, dt: float):
    """Integrate to ``t_final`` and return (times, states) at ``n_samples`` equal spacings.

    RK4 is stable on the imaginary axis only for |lambda| dt < 2.8, so dt
    should stay well below 1 / (largest transition frequency). The step is
    shrunk so that every sample interval holds a whole number of steps.
    """
    if not dt > 0 or not t_final > 0 or n_samples < 1:
        raise DomainError("need dt > 0, t_final > 0, n_samples >= 1")
    rho0 = np.ascontiguousarray(np.asarray(rho0, dtype=complex))
    if rho0.shape != (gen.dim, gen.dim):
        raise DimensionError(f"state of shape {rho0.shape} on generator of dim {gen.dim}")
    interval = t_final / n_samples
    steps = max(1, int(np.ceil(interval / dt - 1e-9)))
    step = interval / steps
    h, lefts, rights, rates = gen.kernel_arrays()
    states, drift = _kernels.rk4_samples(rho0, h, lefts, rights, rates, step, steps, n_samples)
    if not np.all(np.isfinite(states)) or drift > TRACE_DRIFT_TOL:
        raise IntegrationDivergedError(
            f"per-step trace drift {drift:.3e} (limit {TRACE_DRIFT_TOL:.0e}) with dt={step:.3e}; reduce dt"
        )
    worst = min(float(np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0]) for s in states)
    if worst < -PSD_TOL:
        warnings.warn(f"minimum eigenvalue {worst:.3e} during integration", PositivityWarning, stacklevel=2)
    _check_cutoff(states[-1], gen.dims)
    times = interval * np.arange(1, n_samples + 1)
    return times, states


def integrate(gen: Generator, rho0, t_final: float, dt: float) -> DensityMatrix:
    _, states = integrate_samples(gen, rho0, t_final, 1, dt)
    return DensityMatrix(states[-1], check=False)


def steady_state(gen: Generator, *, max_dense_dim: int = MAX_DENSE_DIM, t_long=None, dt=None) -> DensityMatrix:
    """Stationary state of ``gen``.

    Solves L vec(rho) = 0 with the first equation replaced by Tr rho = 1.
    Above ``max_dense_dim`` the state is obtained by integrating the maximally
    mixed state for ``t_long`` instead.
    """
    d = gen.dim
    if d > max_dense_dim:
        if t_long is None or dt is None:
            raise DomainError(f"dimension {d} > {max_dense_dim}: pass t_long and dt for the integration fallback")
        rho = integrate(gen, np.eye(d, dtype=complex) / d, t_long, dt).entries
    else:
        sup = gen.liouvillian()
        sup[0, :] = 0.0
        sup[0, :: d + 1] = 1.0
        rhs = np.zeros(d * d, dtype=complex)
        rhs[0] = 1.0
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                vec = scipy.linalg.solve(sup, rhs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise NonUniqueSteadyStateError(f"Liouvillian has more than one stationary state: {exc}") from exc
        rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    out = DensityMatrix(rho, check=False)
    if out.min_eigenvalue() < -PSD_TOL:
        warnings.warn(f"steady state has eigenvalue {out.min_eigenvalue():.3e}", PositivityWarning, stacklevel=2)
    _check_cutoff(rho, gen.dims)
    return out


def _sx(s_minus):
    s_minus = np.asarray(s_minus, dtype=complex)
    return s_minus, s_minus.conj().T


def _squeeze_coefficients(coef: BathCoefficients, gamma_c):
    if gamma_c is None:
        return coef.C, coef.D
    c = 0.5 * f_function(coef.omega, coef.dt) * gamma_c
    return c, np.conj(c)


def no_jump_state(phi, coef: BathCoefficients, gamma_c, s_minus) -> np.ndarray:
    """Unnormalised system state after a step without emission.

    [1 - A s+s- - B s-s+ - C s+^2 - D s-^2] phi, where C = f gamma_C / 2 and
    D = C* when ``gamma_c`` is given, else the values stored in ``coef``.
    """
    sm, sp = _sx(s_minus)
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (sm.shape[0],):
        raise DimensionError(f"state of shape {phi.shape} on operators of dim {sm.shape[0]}")
    c, d = _squeeze_coefficients(coef, gamma_c)
    kernel = np.eye(sm.shape[0]) - coef.A * sp @ sm - coef.B * sm @ sp - c * sp @ sp - d * sm @ sm
    return kernel @ phi


def emission_density(rho, a_t, b_t, c_t, d_t, s_minus) -> np.ndarray:
    """Unnormalised state of the emission branch: A~ s-rho s+ + B~ s+rho s- + C~ s-rho s- + D~ s+rho s+."""
    sm, sp = _sx(s_minus)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != sm.shape:
        raise DimensionError(f"state of shape {rho.shape} on operators of shape {sm.shape}")
    return a_t * sm @ rho @ sp + b_t * sp @ rho @ sm + c_t * sm @ rho @ sm + d_t * sp @ rho @ sp


def combine_subensembles(rho, coef: BathCoefficients, gamma_c: float, s_minus) -> np.ndarray:
    """Interaction-picture state after one step, averaged over both branches."""
    sm, sp = _sx(s_minus)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != sm.shape:
        raise DimensionError(f"state of shape {rho.shape} on operators of shape {sm.shape}")
    f = f_function(coef.omega, coef.dt)
    drain = coef.A * sp @ sm + coef.B * sm @ sp
    squeeze = f * sp @ sp + np.conj(f) * sm @ sm
    out = rho - (drain @ rho + rho @ drain.conj().T)
    out = out - 0.5 * gamma_c * (squeeze @ rho + rho @ squeeze.conj().T)
    out = out + 2 * coef.A.real * sm @ rho @ sp + 2 * coef.B.real * sp @ rho @ sm
    feed = f * sp @ rho @ sp
    return out + gamma_c * (feed + feed.conj().T)
