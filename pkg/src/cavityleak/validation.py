"""Cross-checks between the closed forms, the moment equations and full density-matrix runs.

Each check returns a ``Check``. ``run_all`` drives them for the ``validate``
CLI mode.
"""
from __future__ import annotations

import time
import warnings
from math import factorial
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import composite, single
from .master import build_composite_generator, build_single_generator, emission_rate, integrate_samples, steady_state
from .operators import (
    DickeBasis,
    FockSpace,
    annihilation,
    commutator,
    contraction_error,
    explicit_spin_ensemble,
    hp_sigma_operators,
    sigma_minus_coef,
    sigma_plus_coef,
    symmetric_state,
)
from .params import CompositeParams, SingleParams

RESONANT_FIXTURE = CompositeParams(omega_c=100.0, omega_0=100.0, kappa=0.1, gamma=1e-3, n_atoms=100, g_c=0.1)


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _timed(name, fn, *args, **kwargs) -> Check:
    t0 = time.perf_counter()
    passed, detail = fn(*args, **kwargs)
    return Check(name, bool(passed), detail, time.perf_counter() - t0)


def coherent_state(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    amp = np.array([alpha**k / np.sqrt(float(factorial(k))) for k in n], dtype=complex)
    return amp / np.linalg.norm(amp)


def check_closed_form_single(n_draws=1000, rtol=1e-10, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_draws):
        ga = rng.uniform(0, 10)
        gb = rng.uniform(0, ga)
        if gb >= ga:
            continue
        p = SingleParams(ga, gb, rng.uniform(-5, 5), rng.uniform(0, 100))
        closed = single.stationary_rate_closed_form(p)
        functional = single.emission_functional(single.stationary_moments(p), p)
        worst = max(worst, abs(closed - functional) / max(abs(closed), 1e-300))
    return worst <= rtol, f"max relative deviation {worst:.2e} (limit {rtol:.0e})"


def check_single_master(cutoff=12):
    p = SingleParams(1.0, 0.1, 0.0, 0.0)
    gen = build_single_generator(p, FockSpace(cutoff))
    rho = steady_state(gen)
    pop = rho.expect(gen.ops["s_plus"] @ gen.ops["s_minus"]).real
    rate = emission_rate(rho, gen).total
    ok = abs(pop - 1 / 9) <= 1e-7 and abs(rate - 2 / 9) <= 1e-6
    return ok, f"<s+s-> - 1/9 = {pop - 1/9:.2e}, I - 2/9 = {rate - 2/9:.2e}"


def check_three_way(p=RESONANT_FIXTURE, cutoff=6, agree=1e-2, dm_tol=1e-5):
    closed = composite.cavity_rate_closed_form(p)
    moment = composite.cavity_rate_moments(p)
    gen = build_composite_generator(p, FockSpace(cutoff), FockSpace(cutoff))
    rho = steady_state(gen)
    dm = emission_rate(rho, gen).channels["cavity"]
    d1 = abs(closed - moment) / moment
    d2 = abs(dm - moment) / moment
    ok = d1 < agree and d2 < dm_tol
    return ok, f"closed {closed:.6e}, moments {moment:.6e} (dev {d1:.2e}), density matrix {dm:.6e} (dev {d2:.2e})"


def check_trace_regression(p=RESONANT_FIXTURE, cutoff=5, seed=2):
    rng = np.random.default_rng(seed)
    space = FockSpace(cutoff)
    fixed = build_composite_generator(p, space, space)
    printed = build_composite_generator(p, space, space, as_printed=True)
    # random state kept below the top level of the atomic ladder
    d = space.dim
    keep = np.array([i * d + j for i in range(d) for j in range(d - 1)])
    v = rng.normal(size=(keep.size, 3)) + 1j * rng.normal(size=(keep.size, 3))
    rho = np.zeros((d * d, d * d), dtype=complex)
    rho[np.ix_(keep, keep)] = v @ v.conj().T
    rho /= np.trace(rho).real
    t_fixed = abs(fixed.trace_derivative(rho))
    t_printed = printed.trace_derivative(rho).real
    excess = abs(t_printed - p.collective_decay)
    ok = t_fixed < 1e-12 and excess < 1e-12 * max(1.0, p.collective_decay)
    return ok, f"corrected dTr/dt = {t_fixed:.1e}; printed dTr/dt = {t_printed:.12g} vs N Gamma = {p.collective_decay:.12g}"


def closure_trajectories(p=RESONANT_FIXTURE, cutoff=7, t_final=0.1, n_samples=20, dt=5e-5):
    """Moments from density-matrix integration and from the derived ODEs at the same times."""
    space = FockSpace(cutoff)
    gen = build_composite_generator(p, space, space)
    psi = np.kron(coherent_state(0.3, cutoff), coherent_state(0.2j - 0.1, cutoff))
    rho0 = np.outer(psi, psi.conj())
    c, s = gen.ops["c"], gen.ops["S"]
    times, states = integrate_samples(gen, rho0, t_final, n_samples, dt)
    dm = np.array([composite.moments_of(r, c, s) for r in states])
    ode = composite.moment_trajectory(p, composite.moments_of(rho0, c, s), times)
    return times, dm, ode


def check_closure(rtol=1e-7):
    _, dm, ode = closure_trajectories()
    rel = np.linalg.norm(dm - ode, axis=1) / np.linalg.norm(ode, axis=1)
    return rel.max() <= rtol, f"max relative deviation over 20 samples {rel.max():.2e} (limit {rtol:.0e})"


def check_discrepancy_report(p=RESONANT_FIXTURE):
    a = composite.format_discrepancy_report(p)
    b = composite.format_discrepancy_report(p)
    n = len(composite.discrepancy_report(p))
    return a == b, f"report stable, {n} differing terms"


def check_dicke(max_n=4):
    worst = 0.0
    for n in range(1, max_n + 1):
        sp, sm, _ = explicit_spin_ensemble(n)
        for l in range(n + 1):
            ket = symmetric_state(n, l)
            if l < n:
                up = sp @ ket
                worst = max(worst, abs(np.vdot(symmetric_state(n, l + 1), up) - sigma_plus_coef(n, l)))
            if l > 0:
                down = sm @ ket
                worst = max(worst, abs(np.vdot(symmetric_state(n, l - 1), down) - sigma_minus_coef(n, l)))
    err = contraction_error(100, 1)
    s_minus = annihilation(FockSpace(10))
    comm = commutator(s_minus, s_minus.conj().T)[:-1, :-1]
    # sqrt(n)**2 is n only to within rounding
    comm_ok = np.abs(comm - np.eye(comm.shape[0])).max() <= 1e-13
    hp_p, hp_m = hp_sigma_operators(DickeBasis(5))
    hp_ok = abs(hp_p[1, 0] - np.sqrt(5)) < 1e-12
    ok = worst <= 1e-12 and abs(err - 0.005013) <= 1e-6 and comm_ok and hp_ok
    return ok, f"brute-force deviation {worst:.1e}, contraction_error(100,1)={err:.6f}, [S-,S+]=1 interior: {comm_ok}"


def integrator_errors(dts=(0.05, 0.025), t_final=1.0, cutoff=10):
    p = SingleParams(1.0, 0.3, 0.1, 2.0)
    gen = build_single_generator(p, FockSpace(cutoff))
    rho0 = np.outer(coherent_state(0.5, cutoff), coherent_state(0.5, cutoff).conj())
    exact = (scipy.linalg.expm(gen.liouvillian() * t_final) @ rho0.ravel()).reshape(rho0.shape)
    errors = []
    for dt in dts:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, states = integrate_samples(gen, rho0, t_final, 1, dt)
        errors.append(np.abs(states[-1] - exact).max())
    return errors


def check_integrator_order():
    e1, e2 = integrator_errors()
    ratio = e1 / e2
    return abs(ratio - 16) <= 2, f"error ratio {ratio:.2f} (expected 16 +- 2)"


def load_fixture(path) -> dict:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, value = line.partition("=")
            if value.strip() and key.strip() != "mode":
                values[key.strip()] = float(value)
    return values


def check_headline(path, target=301.0, rtol=0.05):
    vals = load_fixture(path)
    need = ("omega_c", "omega_0", "kappa", "Gamma", "N", "g_c")
    if not all(k in vals for k in need):
        return None, "fixture not populated; skipped"
    p = CompositeParams(vals["omega_c"], vals["omega_0"], vals["kappa"], vals["Gamma"], int(vals["N"]), vals["g_c"])
    rate = composite.cavity_rate_closed_form(p)
    return abs(rate - target) / target <= rtol, f"I_kappa = {rate:.4g} s^-1 (target {target})"


def run_all(headline_fixture=None) -> list[Check]:
    checks = [
        _timed("closed-form single-system rate", check_closed_form_single),
        _timed("single-system master equation", check_single_master),
        _timed("composite three-way agreement", check_three_way),
        _timed("trace-preservation regression", check_trace_regression),
        _timed("moment-closure exactness", check_closure),
        _timed("printed-vs-derived report", check_discrepancy_report),
        _timed("Dicke and contraction", check_dicke),
        _timed("integrator order", check_integrator_order),
    ]
    if headline_fixture is not None:
        t0 = time.perf_counter()
        passed, detail = check_headline(headline_fixture)
        if passed is not None:
            checks.append(Check("headline rate (optional)", passed, detail, time.perf_counter() - t0))
    return checks
