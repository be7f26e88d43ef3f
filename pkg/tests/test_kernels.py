import os
import subprocess
import sys

import numpy as np
import pytest

from cavityleak import _kernels
from cavityleak.master import build_composite_generator, build_single_generator
from cavityleak.operators import FockSpace
from cavityleak.params import CompositeParams, SingleParams


def generator_arrays():
    space = FockSpace(3)
    gen = build_composite_generator(CompositeParams(2.0, 2.5, 0.3, 0.05, 4, 0.2), space, space)
    rng = np.random.default_rng(0)
    v = rng.normal(size=(gen.dim, 2)) + 1j * rng.normal(size=(gen.dim, 2))
    rho = v @ v.conj().T
    return gen, rho / np.trace(rho).real


def test_rhs_matches_generator_apply():
    gen, rho = generator_arrays()
    h, lefts, rights, rates = gen.kernel_arrays()
    expected = gen.apply(rho)
    for rhs in (_kernels.lindblad_rhs_py, _kernels.lindblad_rhs_jit):
        np.testing.assert_allclose(rhs(rho, h, np.ascontiguousarray(h.conj().T), lefts, rights, rates), expected, atol=1e-13)


def test_jit_and_python_agree():
    gen, rho = generator_arrays()
    h, lefts, rights, rates = gen.kernel_arrays()
    a, drift_a = _kernels.rk4_samples_py(rho, h, lefts, rights, rates, 0.01, 10, 3)
    b, drift_b = _kernels.rk4_samples_jit(rho, h, lefts, rights, rates, 0.01, 10, 3)
    np.testing.assert_allclose(a, b, atol=1e-13)
    assert drift_a == pytest.approx(drift_b, abs=1e-15)


def test_empty_jump_list():
    gen = build_single_generator(SingleParams(0, 0, 0, 1.0), FockSpace(3))
    h, lefts, rights, rates = gen.kernel_arrays()
    rho = np.eye(4, dtype=complex) / 4
    out, drift = _kernels.rk4_samples(rho, h, lefts, rights, rates, 0.1, 5, 1)
    np.testing.assert_allclose(out[0], rho, atol=1e-15)
    assert drift < 1e-15


@pytest.mark.parametrize("flag,expected", [("0", "False"), ("off", "False"), ("1", "True")])
def test_environment_flag(flag, expected):
    env = dict(os.environ, CAVITYLEAK_JIT=flag)
    code = "from cavityleak import _kernels as k; print(k.USE_JIT and k.HAS_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
