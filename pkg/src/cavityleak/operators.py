"""Truncated boson ladders, collective-spin (Dicke) operators and products.

Operators are plain dense ``complex128`` numpy arrays in the occupation-number
basis, index 0 being the vacuum / all-ground state. Every ladder is hard
truncated, so commutator identities hold only away from the top level.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from .errors import DimensionError, DomainError

# Guard on the dimension of product spaces; raise it explicitly if needed.
MAX_TOTAL_DIM = 4096


@dataclass(frozen=True)
class FockSpace:
    """Boson mode truncated at occupation ``cutoff``."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise DomainError(f"cutoff must be an integer >= 2, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1


@dataclass(frozen=True)
class DickeBasis:
    """Symmetric states |l> of ``n_atoms`` two-level atoms, l = 0..l_max."""

    n_atoms: int
    l_max: int | None = None

    def __post_init__(self):
        if self.n_atoms < 1:
            raise DomainError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.l_max is None:
            object.__setattr__(self, "l_max", self.n_atoms)
        if not 0 <= self.l_max <= self.n_atoms:
            raise DomainError(f"need 0 <= l_max <= N, got l_max={self.l_max}, N={self.n_atoms}")

    @property
    def dim(self) -> int:
        return self.l_max + 1


def _dim(space) -> int:
    return space.dim if hasattr(space, "dim") else FockSpace(int(space)).dim


def annihilation(space: FockSpace | int) -> np.ndarray:
    """Lowering operator with a[n-1, n] = sqrt(n)."""
    d = _dim(space)
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def creation(space: FockSpace | int) -> np.ndarray:
    return annihilation(space).conj().T.copy()


def number(space: FockSpace | int) -> np.ndarray:
    return np.diag(np.arange(_dim(space), dtype=float)).astype(complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _check_level(n_atoms: int, l: int) -> None:
    if n_atoms < 1 or not 0 <= l <= n_atoms:
        raise DomainError(f"need 0 <= l <= N with N >= 1, got N={n_atoms}, l={l}")


def sigma_plus_coef(n_atoms: int, l: int) -> float:
    """Matrix element <l+1| sigma+ |l> = sqrt(l+1) sqrt(N-l)."""
    _check_level(n_atoms, l)
    return sqrt(l + 1) * sqrt(n_atoms - l)


def sigma_minus_coef(n_atoms: int, l: int) -> float:
    """Matrix element <l-1| sigma- |l> = sqrt(N-l+1) sqrt(l)."""
    _check_level(n_atoms, l)
    return sqrt(n_atoms - l + 1) * sqrt(l)


def hp_sigma_operators(basis: DickeBasis) -> tuple[np.ndarray, np.ndarray]:
    """Collective sigma+ and sigma- in the Holstein-Primakoff form.

    sigma+ = sqrt(N) S+ A_s and sigma- = sqrt(N) A_s S-, with
    A_s = sqrt(1 - S+ S- / N) and S+- the boson ladder truncated at l_max.
    """
    n = basis.n_atoms
    s_minus = annihilation(FockSpace(max(basis.l_max, 2)))[: basis.dim, : basis.dim]
    s_plus = s_minus.conj().T
    levels = np.arange(basis.dim, dtype=float)
    a_s = np.diag(np.sqrt(np.clip(1.0 - levels / n, 0.0, None))).astype(complex)
    root_n = sqrt(n)
    return root_n * s_plus @ a_s, root_n * a_s @ s_minus


def sigma_3(basis: DickeBasis) -> np.ndarray:
    """Diagonal population-difference operator, <l|sigma_3|l> = l - N/2."""
    return np.diag(np.arange(basis.dim) - basis.n_atoms / 2).astype(complex)


def contraction_error(n_atoms: int, l: int) -> float:
    """Relative error of replacing sigma+ |l> by sqrt(N) S+ |l>.

    Measured against the contracted value sqrt(N) sqrt(l+1), so the result is
    1 - sqrt(1 - l/N): zero at l = 0 and ~ l/(2N) for N >> l.
    """
    if n_atoms < 1 or not 0 <= l < n_atoms:
        raise DomainError(f"need 0 <= l < N, got N={n_atoms}, l={l}")
    x = l / n_atoms
    # 1 - sqrt(1 - x) written without cancellation
    return x / (1.0 + sqrt(1.0 - x))


def tensor_product(a: np.ndarray, b: np.ndarray, max_dim: int | None = None) -> np.ndarray:
    """Kronecker product a (x) b with a guard on the total dimension."""
    limit = MAX_TOTAL_DIM if max_dim is None else max_dim
    total = a.shape[0] * b.shape[0]
    if total > limit:
        raise DimensionError(f"product dimension {total} exceeds limit {limit}")
    return np.kron(a, b)


def explicit_spin_ensemble(n_atoms: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective operators built atom by atom on the full 2**N space.

    Returns (sigma+, sigma-, sigma_3) as sums of single-atom operators, with
    single-atom basis (|0>, |1>). Meant as a brute-force reference.
    """
    if n_atoms < 1:
        raise DomainError("n_atoms must be >= 1")
    sp = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    s3 = np.diag([-0.5, 0.5]).astype(complex)
    eye = identity(2)

    def embed(op, site):
        out = np.ones((1, 1), dtype=complex)
        for j in range(n_atoms):
            out = np.kron(out, op if j == site else eye)
        return out

    total_p = sum(embed(sp, i) for i in range(n_atoms))
    total_3 = sum(embed(s3, i) for i in range(n_atoms))
    return total_p, total_p.conj().T, total_3


def symmetric_state(n_atoms: int, l: int) -> np.ndarray:
    """Normalised equal superposition of all 2**N product states with l excitations."""
    _check_level(n_atoms, l)
    psi = np.zeros(2**n_atoms, dtype=complex)
    for excited in combinations(range(n_atoms), l):
        # atom 0 is the most significant bit of the kron ordering
        idx = sum(1 << (n_atoms - 1 - j) for j in excited)
        psi[idx] = 1.0
    return psi / sqrt(comb(n_atoms, l))
