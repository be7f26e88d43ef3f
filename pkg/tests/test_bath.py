import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityleak.bath import (
    BathCoefficients,
    ModeSet,
    coefficients_abcd,
    f_function,
    ordered_double_integral,
    rates_from_coefficients,
    stationary_kernel,
    tilde_coefficients,
)
from cavityleak.errors import DomainError

# High-precision (mpmath, 30 digits) nested quadrature of the four mode sums
# for one mode: omega_k=1.3, g=0.5+0.2i, g~=|g| e^{0.7i}, omega=1, dt=2.
MPMATH_ABCD = {
    "A": 0.49854261773802322 - 0.28493420279819946j,
    "B": 0.15419726374858589 - 0.27198099976642275j,
    "C": -0.16779061982710097 + 0.29094502960624345j,
    "D": -0.20199708097829278 + 0.26832793673188343j,
}


def gauss_legendre_oracle(alpha, beta, dt, n=400):
    """Nested Gauss-Legendre quadrature of the ordered double integral."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * dt * (x + 1)
    wt = 0.5 * dt * w
    s = 0.5 * (x + 1)
    ws = 0.5 * w
    # inner variable t2 = t * s on [0, t]
    inner = (np.exp(1j * beta * np.outer(t, s)) * ws).sum(axis=1) * t
    return np.sum(wt * np.exp(1j * alpha * t) * inner)


def single_mode():
    g = 0.5 + 0.2j
    return ModeSet([1.3], [g], [abs(g) * cmath.exp(0.7j)])


def test_empty_modeset():
    coef = coefficients_abcd(ModeSet.empty(), 1.0, 0.5)
    assert coef.A == coef.B == coef.C == coef.D == 0
    assert rates_from_coefficients(coef) == (0.0, 0.0)


def test_modeset_invariants():
    with pytest.raises(DomainError):
        ModeSet([1.0], [1.0], [0.5])
    with pytest.raises(DomainError):
        ModeSet([-1.0], [1.0], [1.0])
    with pytest.raises(DomainError):
        ModeSet([1.0], [np.nan], [1.0])


def test_resonant_single_mode():
    coef = coefficients_abcd(ModeSet([1.0], [1.0], [1.0]), 1.0, 2.0)
    assert coef.A == pytest.approx(2.0, abs=1e-14)
    assert rates_from_coefficients(coef)[0] == pytest.approx(2.0, abs=1e-14)


def test_against_high_precision_values():
    coef = coefficients_abcd(single_mode(), 1.0, 2.0)
    for name, value in MPMATH_ABCD.items():
        assert getattr(coef, name) == pytest.approx(value, rel=1e-13)


@pytest.mark.parametrize(
    "alpha,beta,dt",
    [(0.3, -0.3, 1.0), (2.0, 0.5, 1.5), (-7.0, 3.0, 2.0), (40.0, -40.0, 3.0), (25.0, 37.0, 3.0), (1e-6, 2.0, 1.0), (1.0, -1.0 + 1e-7, 1.0)],
)
def test_double_integral_matches_quadrature(alpha, beta, dt):
    assert ordered_double_integral(alpha, beta, dt) == pytest.approx(gauss_legendre_oracle(alpha, beta, dt), rel=1e-10)


@pytest.mark.parametrize("nu_dt", [1e2, 5e2, 1e3])
def test_double_integral_high_frequency(nu_dt):
    dt = 1.0
    for alpha, beta in [(nu_dt, -nu_dt), (nu_dt, 0.5 * nu_dt), (-0.3 * nu_dt, nu_dt)]:
        got = ordered_double_integral(alpha, beta, dt)
        assert got == pytest.approx(gauss_legendre_oracle(alpha, beta, dt, n=1500), rel=1e-8)


def test_stationary_kernel_formula_and_series():
    dt = 0.7
    for nu in (3.0, 0.1, 1e-3):
        x = nu * dt
        closed = -(cmath.exp(1j * x) - 1 - 1j * x) / nu**2
        assert stationary_kernel(nu, dt) == pytest.approx(closed, rel=1e-9)
    # below the series threshold the closed form cancels; the kernel must not
    assert stationary_kernel(1e-9, dt) == pytest.approx(dt**2 / 2, rel=1e-8)
    assert stationary_kernel(0.0, dt) == pytest.approx(dt**2 / 2)


def test_d_is_conjugate_of_swapped_c_for_real_couplings():
    modes = ModeSet([0.8, 1.7, 2.4], [0.3, -0.5, 0.2], [0.3, -0.5, 0.2])
    omega, dt = 1.1, 1.7
    coef = coefficients_abcd(modes, omega, dt)
    swapped = sum(
        g * g * gauss_legendre_oracle(omega + wk, omega - wk, dt) for wk, g in zip(modes.omega, modes.g.real)
    )
    assert coef.D == pytest.approx(np.conj(swapped), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3))
def test_quadratic_scaling_in_coupling(dt, lam):
    modes = ModeSet([0.5, 1.5], [0.2 + 0.1j, -0.4j], [0.1 - 0.2j, 0.4])
    base = coefficients_abcd(modes, 1.0, dt)
    scaled = coefficients_abcd(modes.scaled(lam), 1.0, dt)
    for name in "ABCD":
        assert getattr(scaled, name) == pytest.approx(lam**2 * getattr(base, name), rel=1e-12, abs=1e-15)


def test_gamma_a_non_negative_with_dominant_resonant_mode():
    g = np.array([1.0, 0.05, 0.05])
    modes = ModeSet([1.0, 3.0, 0.2], g, g.conj())
    for dt in (0.5, 2.0, 10.0):
        assert rates_from_coefficients(coefficients_abcd(modes, 1.0, dt))[0] >= 0


def test_rates_arithmetic():
    coef = BathCoefficients(1 + 2j, 0.5, 0, 0, dt=2.0, omega=1.0)
    assert rates_from_coefficients(coef) == (1.0, 0.5)


def test_nan_inputs_rejected():
    with pytest.raises(DomainError):
        coefficients_abcd(single_mode(), float("nan"), 1.0)
    with pytest.raises(DomainError):
        coefficients_abcd(single_mode(), 1.0, 0.0)


def test_f_function():
    assert abs(f_function(1.0, math.pi)) < 1e-15
    assert f_function(1.0, math.pi / 2) == pytest.approx(1j)
    # series limit, compared with exp(i w dt) sin(w dt) / w expanded to second order
    assert f_function(1e-12, 3.0) == pytest.approx(3.0 + 9e-12j, rel=1e-14)
    assert f_function(0.0, 3.0) == 3.0


def test_tilde_coefficients_examples():
    zero = BathCoefficients(0.1, 0.2, 0, 0, dt=1.0, omega=1.0)
    assert tilde_coefficients(zero)[2] == 0
    coef = BathCoefficients(0, 0, 0.5 * 1j * 2, 0, dt=math.pi / 2, omega=1.0)
    assert tilde_coefficients(coef)[2] == pytest.approx(-2j)
    coef = BathCoefficients(1 + 1j, 2 - 1j, 0.3 + 0.4j, 0.3 - 0.4j, dt=0.9, omega=1.3)
    a_t, b_t, c_t, d_t = tilde_coefficients(coef)
    assert (a_t, b_t) == (2.0, 4.0)
    assert d_t == pytest.approx(np.conj(c_t))


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(0.01, 10), st.floats(-5, 5))
def test_tilde_c_equals_conjugate_f_times_gamma_c(omega, dt, gamma_c):
    f = f_function(omega, dt)
    coef = BathCoefficients(0, 0, 0.5 * f * gamma_c, np.conj(0.5 * f * gamma_c), dt=dt, omega=omega)
    _, _, c_t, d_t = tilde_coefficients(coef)
    assert c_t == pytest.approx(np.conj(f) * gamma_c, abs=1e-12)
    assert d_t == pytest.approx(f * gamma_c, abs=1e-12)
    assert tilde_coefficients(BathCoefficients(0, 0, 0, 0, dt=dt, omega=omega), gamma_c)[2] == pytest.approx(
        np.conj(f) * gamma_c, abs=1e-12
    )


def test_modeset_file_roundtrip(tmp_path):
    path = tmp_path / "modes.txt"
    path.write_text("# w Re g Im g Re gt Im gt\n1.3 0.5 0.2 0.5 0.2\n\n0.7 0.1 0 0 0.1\n")
    modes = ModeSet.from_file(path)
    assert len(modes) == 2
    assert modes.g_tilde[1] == pytest.approx(0.1j)
    (tmp_path / "bad.txt").write_text("1 2 3\n")
    with pytest.raises(DomainError):
        ModeSet.from_file(tmp_path / "bad.txt")
