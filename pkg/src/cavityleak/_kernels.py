"""Hot loops for density-matrix propagation.

Each kernel is written once in numba-compatible numpy. The plain functions
are the ``*_py`` fallback; ``*_jit`` are the same code objects compiled with
``numba.njit`` against jitted helpers. The public names point at the jitted
build unless numba is missing or the environment sets ``CAVITYLEAK_JIT=0``.
"""
import os
import types

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and os.environ.get("CAVITYLEAK_JIT", "1").strip().lower() not in ("0", "false", "no", "off")


def lindblad_rhs_py(rho, h_cond, h_cond_dag, lefts, rights_dag, rates):
    """-i (H rho - rho H^dag) + sum_k rate_k L_k rho R_k^dag."""
    out = -1j * (h_cond @ rho - rho @ h_cond_dag)
    for k in range(rates.shape[0]):
        out += rates[k] * (lefts[k] @ rho @ rights_dag[k])
    return out


def trace_py(m):
    t = 0j
    for i in range(m.shape[0]):
        t += m[i, i]
    return t


def rk4_samples_py(rho0, h_cond, lefts, rights_dag, rates, dt, steps_per_sample, n_samples):
    """Fixed-step RK4.

    Returns the state after every ``steps_per_sample`` steps, ``n_samples``
    times, and the largest single-step change of the trace.
    """
    d = rho0.shape[0]
    h_dag = np.ascontiguousarray(h_cond.conj().T)
    out = np.empty((n_samples, d, d), dtype=np.complex128)
    rho = rho0.copy()
    tr_prev = _trace(rho)
    max_drift = 0.0
    half = 0.5 * dt
    for s in range(n_samples):
        for _ in range(steps_per_sample):
            k1 = _rhs(rho, h_cond, h_dag, lefts, rights_dag, rates)
            k2 = _rhs(rho + half * k1, h_cond, h_dag, lefts, rights_dag, rates)
            k3 = _rhs(rho + half * k2, h_cond, h_dag, lefts, rights_dag, rates)
            k4 = _rhs(rho + dt * k3, h_cond, h_dag, lefts, rights_dag, rates)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            tr = _trace(rho)
            drift = abs(tr - tr_prev)
            if drift > max_drift:
                max_drift = drift
            tr_prev = tr
        out[s] = rho
    return out, max_drift


_rhs = lindblad_rhs_py
_trace = trace_py


def _rebind(func, **helpers):
    """Copy of ``func`` whose global lookups see ``helpers`` instead."""
    scope = dict(func.__globals__, **helpers)
    return types.FunctionType(func.__code__, scope, func.__name__, func.__defaults__, func.__closure__)


if HAS_NUMBA:
    lindblad_rhs_jit = numba.njit(cache=True)(lindblad_rhs_py)
    trace_jit = numba.njit(cache=True)(trace_py)
    rk4_samples_jit = numba.njit(cache=True)(_rebind(rk4_samples_py, _rhs=lindblad_rhs_jit, _trace=trace_jit))
else:  # pragma: no cover
    lindblad_rhs_jit, rk4_samples_jit = lindblad_rhs_py, rk4_samples_py

lindblad_rhs = lindblad_rhs_jit if USE_JIT else lindblad_rhs_py
rk4_samples = rk4_samples_jit if USE_JIT else rk4_samples_py
