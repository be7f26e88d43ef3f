"""Cavity plus collective-atom system: ten second-order moments and the cavity emission rate.

Moment order (``MOMENT_NAMES``)::

    mu1  = <c+ c>                  mu2  = <S+ S->
    eta1 = i<(S- + S+)(c - c+)>    eta2 = i<(S- - S+)(c + c+)>
    eta3 = <(S- - S+)(c - c+)>     eta4 = <(S- + S+)(c + c+)>
    xi1  = i<c^2 - c+^2>           xi2  = <c^2 + c+^2>
    xi3  = i<S-^2 - S+^2>          xi4  = <S-^2 + S+^2>

The Hamiltonian is bilinear and the jumps are linear in the mode operators,
so these moments obey a closed affine system dx/dt = M x + b. Two versions
are kept: the equations as published (``printed_system``) and the system
read off the master-equation generator (``derived_system``). The derived one
is authoritative.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DegenerateParametersError, NoStationaryStateError, NumericalError, RegimeWarning
from .master import Generator, Jump
from .operators import FockSpace, annihilation, identity
from .params import CompositeParams

MOMENT_NAMES = ("mu1", "mu2", "eta1", "eta2", "eta3", "eta4", "xi1", "xi2", "xi3", "xi4")
# Parameters on which (M, b) depends linearly.
LINEAR_PARAMETERS = ("omega_c", "omega_0", "kappa", "n_gamma", "coupling")

EXTRACTION_CUTOFF = 4
EXTRACTION_PROBES = 40
EXTRACTION_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CompositeMoments:
    mu1: float
    mu2: float
    eta1: float
    eta2: float
    eta3: float
    eta4: float
    xi1: float
    xi2: float
    xi3: float
    xi4: float

    @classmethod
    def from_array(cls, x) -> "CompositeMoments":
        return cls(*(float(v) for v in np.asarray(x, dtype=float)))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in MOMENT_NAMES])


def composite_observables(c: np.ndarray, s: np.ndarray) -> list[np.ndarray]:
    """The ten Hermitian observables in ``MOMENT_NAMES`` order."""
    cd, sd = c.conj().T, s.conj().T
    return [
        cd @ c,
        sd @ s,
        1j * (s + sd) @ (c - cd),
        1j * (s - sd) @ (c + cd),
        (s - sd) @ (c - cd),
        (s + sd) @ (c + cd),
        1j * (c @ c - cd @ cd),
        c @ c + cd @ cd,
        1j * (s @ s - sd @ sd),
        s @ s + sd @ sd,
    ]


def moments_of(rho, c: np.ndarray, s: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(o @ rho).real for o in composite_observables(c, s)])


def printed_system(p: CompositeParams) -> tuple[np.ndarray, np.ndarray]:
    """(M, b) of the rate equations in their published form."""
    g = p.collective_coupling
    wc, w0, kap, ng = p.omega_c, p.omega_0, p.kappa, p.collective_decay
    half_zeta = 0.5 * p.zeta
    mu1, mu2, e1, e2, e3, e4, x1, x2, x3, x4 = range(10)
    m = np.zeros((10, 10))
    b = np.zeros(10)
    m[mu1, e1], m[mu1, mu1] = g, -kap
    m[mu2, e2], m[mu2, mu2] = g, -ng
    b[e1] = 2 * g
    m[e1, mu2], m[e1, x4], m[e1, e3], m[e1, e4], m[e1, e1] = 4 * g, 2 * g, w0, wc, -half_zeta
    b[e2] = 2 * g
    m[e2, mu1], m[e2, x2], m[e2, e4], m[e2, e3], m[e2, e2] = 4 * g, 2 * g, w0, wc, -half_zeta
    m[e3, x1], m[e3, x3], m[e3, e1], m[e3, e2], m[e3, e3] = -2 * g, -2 * g, -w0, -wc, -half_zeta
    m[e4, e2], m[e4, e1], m[e4, e4] = -w0, -wc, -half_zeta
    m[x1, e4], m[x1, x2], m[x1, x1] = 2 * g, 2 * wc, -kap
    m[x2, e1], m[x2, x1], m[x2, x2] = -2 * g, -2 * wc, -kap
    m[x3, e4], m[x3, x4], m[x3, x3] = 2 * g, 2 * w0, -ng
    m[x4, e2], m[x4, x3], m[x4, x4] = -2 * g, -2 * w0, -ng
    return m, b


def moment_derivatives_printed(m: CompositeMoments, p: CompositeParams) -> CompositeMoments:
    mat, b = printed_system(p)
    return CompositeMoments.from_array(mat @ m.as_array() + b)


def _raw_generator(omega_c, omega_0, kappa, n_gamma, coupling, cutoff) -> Generator:
    """Composite generator from the five linear parameters, without range checks."""
    space = FockSpace(cutoff)
    c = np.kron(annihilation(space), identity(space.dim))
    s = np.kron(identity(space.dim), annihilation(space))
    cd, sd = c.conj().T, s.conj().T
    h = (omega_c - 0.5j * kappa) * cd @ c + (omega_0 - 0.5j * n_gamma) * sd @ s + coupling * (c + cd) @ (sd + s)
    jumps = (Jump(kappa, c, c, "cavity"), Jump(n_gamma, s, s, "atom"))
    return Generator(h, jumps, (space.dim, space.dim), {"c": c, "S": s})


def random_probe_states(cutoff: int, n_probes: int, seed: int) -> list[np.ndarray]:
    """Random mixed states supported two levels below the cutoff in each mode.

    On such states one application of the generator stays inside the
    truncated space, so the moment derivatives carry no truncation error.
    """
    rng = np.random.default_rng(seed)
    dim = cutoff + 1
    inner = cutoff - 1  # levels 0 .. cutoff-2
    idx = np.array([i * dim + j for i in range(inner) for j in range(inner)])
    out = []
    for _ in range(n_probes):
        k = rng.integers(1, 4)
        vecs = rng.normal(size=(idx.size, k)) + 1j * rng.normal(size=(idx.size, k))
        small = vecs @ vecs.conj().T
        rho = np.zeros((dim * dim, dim * dim), dtype=complex)
        rho[np.ix_(idx, idx)] = small / np.trace(small).real
        out.append(rho)
    return out


def extract_moment_system(gen: Generator, probes) -> tuple[np.ndarray, np.ndarray]:
    """Fit dx/dt = M x + b to the generator's action on ``probes``.

    Each probe contributes its ten moments x and their exact time derivatives
    Tr(O L(rho)). Raises if the fit is not exact, which signals truncation
    effects or a non-closing observable set.
    """
    c, s = gen.ops["c"], gen.ops["S"]
    obs = composite_observables(c, s)
    heis = [gen.adjoint(o) for o in obs]
    xs = np.array([[np.trace(o @ r).real for o in obs] for r in probes])
    ys = np.array([[np.trace(h @ r).real for h in heis] for r in probes])
    design = np.hstack([xs, np.ones((len(probes), 1))])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    residual = np.max(np.abs(design @ coef - ys))
    scale = max(1.0, np.max(np.abs(ys)))
    if residual > EXTRACTION_RESIDUAL_TOL * scale:
        raise NumericalError(f"moment extraction residual {residual:.3e}: probes touch the cutoff")
    return coef[:10].T.copy(), coef[10].copy()


@lru_cache(maxsize=None)
def _unit_systems(cutoff: int, n_probes: int, seed: int):
    probes = random_probe_states(cutoff, n_probes, seed)
    out = []
    for k in range(len(LINEAR_PARAMETERS)):
        unit = [0.0] * len(LINEAR_PARAMETERS)
        unit[k] = 1.0
        out.append(extract_moment_system(_raw_generator(*unit, cutoff), probes))
    return tuple(out)


def _linear_values(p: CompositeParams):
    return (p.omega_c, p.omega_0, p.kappa, p.collective_decay, p.collective_coupling)


def derived_system(p: CompositeParams, *, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """(M, b) implied by the master-equation generator.

    Extracted once per unit parameter and combined linearly, so repeated
    calls cost a few small array operations.
    """
    units = _unit_systems(EXTRACTION_CUTOFF, EXTRACTION_PROBES, seed)
    m = np.zeros((10, 10))
    b = np.zeros(10)
    for value, (mk, bk) in zip(_linear_values(p), units):
        m += value * mk
        b += value * bk
    # Extraction noise sits at round-off; snap it so the structure is exact.
    m[np.abs(m) < 1e-12 * max(1.0, np.abs(m).max())] = 0.0
    b[np.abs(b) < 1e-12 * max(1.0, np.abs(b).max(initial=0.0))] = 0.0
    return m, b


def derived_system_direct(p: CompositeParams, *, cutoff: int = EXTRACTION_CUTOFF, seed: int = 0):
    """Extract (M, b) from the generator at ``p`` itself, without the linear decomposition."""
    gen = _raw_generator(*_linear_values(p), cutoff)
    return extract_moment_system(gen, random_probe_states(cutoff, EXTRACTION_PROBES, seed))


def moment_derivatives_derived(m: CompositeMoments, p: CompositeParams) -> CompositeMoments:
    mat, b = derived_system(p)
    return CompositeMoments.from_array(mat @ m.as_array() + b)


def stationary_moments(p: CompositeParams, *, system: str = "derived") -> CompositeMoments:
    """Fixed point of the moment equations; it must be attracting."""
    mat, b = derived_system(p) if system == "derived" else printed_system(p)
    growth = np.linalg.eigvals(mat).real.max()
    if growth >= 0:
        raise NoStationaryStateError(f"moment dynamics not damped (max growth rate {growth:.3e})")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            x = scipy.linalg.solve(mat, -b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise NoStationaryStateError(f"moment matrix is singular: {exc}") from exc
    if np.linalg.norm(mat @ x + b) > 1e-10 * max(np.linalg.norm(b), 1e-300):
        raise NoStationaryStateError("stationary solve left a large residual")
    return CompositeMoments.from_array(x)


def moment_trajectory(p: CompositeParams, x0, times, *, system: str = "derived") -> np.ndarray:
    """Exact solution of dx/dt = M x + b at ``times`` (rows), via the augmented exponential."""
    mat, b = derived_system(p) if system == "derived" else printed_system(p)
    aug = np.zeros((11, 11))
    aug[:10, :10] = mat
    aug[:10, 10] = b
    start = np.append(np.asarray(x0, dtype=float), 1.0)
    return np.array([(scipy.linalg.expm(aug * t) @ start)[:10] for t in times])


def cavity_rate_closed_form(p: CompositeParams) -> float:
    """Stationary cavity emission rate in closed form (valid in the weak-coupling regime)."""
    n, z, k, g, G = p.n_atoms, p.zeta, p.kappa, p.g_c, p.gamma
    w0, wc = p.omega_0, p.omega_c
    num = n * z * k * g**2 * (8 * z * g**2 + z**2 * G + 4 * G * (w0 - wc) ** 2)
    den = 16 * z**2 * g**2 * w0 * wc + 2 * z**2 * k * G * (w0**2 + wc**2) + 4 * k * G * (w0**2 - wc**2) ** 2
    if den == 0:
        raise DegenerateParametersError("closed-form denominator vanishes")
    return num / den


def cavity_rate_moments(p: CompositeParams, *, system: str = "derived") -> float:
    """kappa <c+ c> at the stationary point of the moment equations."""
    return p.kappa * stationary_moments(p, system=system).mu1


class RegimeDiagnostics(NamedTuple):
    decay_ratio: float
    coupling_ratio: float
    cavity_ratio: float
    threshold: float
    passed: bool

    @property
    def max_ratio(self) -> float:
        return max(self.decay_ratio, self.coupling_ratio, self.cavity_ratio)


def regime_check(p: CompositeParams, threshold: float = 1e-2, *, warn: bool = False) -> RegimeDiagnostics:
    """Ratios N Gamma, sqrt(N) g_c and kappa over min(omega_0, omega_c); pass if all <= threshold."""
    w = min(p.omega_0, p.omega_c)
    ratios = (p.collective_decay / w, abs(p.collective_coupling) / w, p.kappa / w)
    diag = RegimeDiagnostics(*ratios, threshold, max(ratios) <= threshold)
    if warn and not diag.passed:
        warnings.warn(f"regime ratio {diag.max_ratio:.3e} above {threshold:.1e}", RegimeWarning, stacklevel=2)
    return diag


class Discrepancy(NamedTuple):
    equation: str
    term: str
    printed: float
    derived: float


def discrepancy_report(p: CompositeParams, rtol: float = 1e-9) -> list[Discrepancy]:
    """Terms where the printed rate equations and the generator disagree at ``p``."""
    pm, pb = printed_system(p)
    dm, db = derived_system(p)
    scale = max(np.abs(dm).max(), np.abs(db).max())
    out = []
    cols = MOMENT_NAMES + ("1",)
    full_p = np.hstack([pm, pb[:, None]])
    full_d = np.hstack([dm, db[:, None]])
    for i, j in zip(*np.nonzero(np.abs(full_p - full_d) > rtol * scale)):
        out.append(Discrepancy(MOMENT_NAMES[i], cols[j], float(full_p[i, j]), float(full_d[i, j])))
    return out


def format_discrepancy_report(p: CompositeParams, rtol: float = 1e-9) -> str:
    rows = discrepancy_report(p, rtol)
    lines = [
        "printed vs generator-derived moment equations",
        f"omega_c={p.omega_c:.12g} omega_0={p.omega_0:.12g} kappa={p.kappa:.12g} "
        f"Gamma={p.gamma:.12g} N={p.n_atoms} g_c={p.g_c:.12g}",
        f"{len(rows)} differing terms",
    ]
    for r in rows:
        lines.append(f"d{r.equation}/dt  term {r.term:>5}: printed {r.printed:+.12e}  derived {r.derived:+.12e}")
    return "\n".join(lines) + "\n"
