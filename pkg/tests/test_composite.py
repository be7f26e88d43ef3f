import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityleak import composite
from cavityleak.composite import (
    MOMENT_NAMES,
    CompositeMoments,
    cavity_rate_closed_form,
    cavity_rate_moments,
    derived_system,
    derived_system_direct,
    discrepancy_report,
    format_discrepancy_report,
    moment_derivatives_derived,
    moment_derivatives_printed,
    printed_system,
    regime_check,
    stationary_moments,
)
from cavityleak.errors import DegenerateParametersError, DomainError, NoStationaryStateError, RegimeWarning
from cavityleak.master import build_composite_generator, emission_rate, steady_state
from cavityleak.operators import FockSpace
from cavityleak.params import CompositeParams

RESONANT = CompositeParams(100.0, 100.0, 0.1, 1e-3, 100, 0.1)
DETUNED = CompositeParams(90.0, 110.0, 0.3, 2e-3, 50, 0.07)

IDX = {name: i for i, name in enumerate(MOMENT_NAMES)}


def regime_params(draw_seed, threshold=1e-3):
    """Random parameters with every regime ratio below ``threshold``."""
    rng = np.random.default_rng(draw_seed)
    w0 = rng.uniform(50, 150)
    wc = w0 * rng.uniform(0.9, 1.1)
    w = min(w0, wc) * threshold
    n = int(rng.integers(1, 500))
    return CompositeParams(wc, w0, rng.uniform(0.05, 1) * w, rng.uniform(0.05, 1) * w / n, n, rng.uniform(0.05, 1) * w / math.sqrt(n))


def test_params_validation_and_zeta():
    assert RESONANT.zeta == pytest.approx(0.2)
    assert RESONANT.collective_coupling == pytest.approx(1.0)
    with pytest.raises(DomainError):
        CompositeParams(0.0, 1.0, 0.1, 0.1, 1, 0.1)
    with pytest.raises(DomainError):
        CompositeParams(1.0, 1.0, -0.1, 0.1, 1, 0.1)
    with pytest.raises(DomainError):
        CompositeParams(1.0, 1.0, 0.1, 0.1, 2.5, 0.1)


def test_printed_zero_moments_uncoupled():
    p = CompositeParams(100, 100, 0.1, 1e-3, 100, 0.0)
    zero = CompositeMoments.from_array(np.zeros(10))
    assert not np.any(moment_derivatives_printed(zero, p).as_array())


def test_printed_zero_moments_coupled():
    d = moment_derivatives_printed(CompositeMoments.from_array(np.zeros(10)), RESONANT).as_array()
    expected = np.zeros(10)
    expected[IDX["eta1"]] = expected[IDX["eta2"]] = 2 * RESONANT.collective_coupling
    np.testing.assert_array_equal(d, expected)


@pytest.mark.parametrize("p", [RESONANT, DETUNED])
def test_printed_equations_agree_with_generator(p):
    # outcome of the comparison: no term differs, the missing coupling in eta4 included
    assert discrepancy_report(p) == []
    pm, pb = printed_system(p)
    dm, db = derived_system(p)
    np.testing.assert_allclose(dm, pm, atol=1e-10)
    np.testing.assert_allclose(db, pb, atol=1e-10)


def test_printed_vs_derived_on_random_points():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        p = CompositeParams(
            rng.uniform(1, 200), rng.uniform(1, 200), rng.uniform(0, 2), rng.uniform(0, 0.01), int(rng.integers(1, 10_000)), rng.uniform(-1, 1)
        )
        m = CompositeMoments.from_array(rng.normal(size=10))
        a = moment_derivatives_printed(m, p).as_array()
        b = moment_derivatives_derived(m, p).as_array()
        assert np.abs(a - b).max() <= 1e-9 * max(1.0, np.abs(a).max())


def test_eta4_has_no_coupling_term():
    m, _ = derived_system(DETUNED)
    row = m[IDX["eta4"]]
    for name in ("mu1", "mu2", "xi1", "xi2", "xi3", "xi4"):
        assert row[IDX[name]] == 0


def test_report_text_is_stable():
    assert format_discrepancy_report(DETUNED) == format_discrepancy_report(DETUNED)
    assert "omega_c=90" in format_discrepancy_report(DETUNED)


def test_uncoupled_block_structure():
    p = CompositeParams(90.0, 110.0, 0.3, 2e-3, 50, 0.0)
    m, b = derived_system(p)
    assert not np.any(b)
    assert m[IDX["mu1"], IDX["mu1"]] == pytest.approx(-p.kappa)
    assert m[IDX["mu2"], IDX["mu2"]] == pytest.approx(-p.collective_decay)
    for name in ("eta1", "eta2", "eta3", "eta4"):
        assert m[IDX[name], IDX[name]] == pytest.approx(-0.5 * p.zeta)
    for name in ("xi1", "xi2"):
        assert m[IDX[name], IDX[name]] == pytest.approx(-p.kappa)
    for name in ("xi3", "xi4"):
        assert m[IDX[name], IDX[name]] == pytest.approx(-p.collective_decay)
    # no coupling between the populations, the mixed block and the squeezing blocks
    blocks = [[0], [1], [2, 3, 4, 5], [6, 7], [8, 9]]
    for i, bi in enumerate(blocks):
        for j, bj in enumerate(blocks):
            if i != j:
                assert not np.any(m[np.ix_(bi, bj)])


def test_extraction_independent_of_probe_states():
    m0, b0 = derived_system_direct(DETUNED, seed=0)
    m1, b1 = derived_system_direct(DETUNED, seed=123)
    assert np.abs(m0 - m1).max() < 1e-9
    assert np.abs(b0 - b1).max() < 1e-9


def test_extraction_independent_of_cutoff():
    m0, b0 = derived_system_direct(DETUNED, cutoff=4)
    m1, b1 = derived_system_direct(DETUNED, cutoff=6)
    assert np.abs(m0 - m1).max() < 1e-9
    assert np.abs(b0 - b1).max() < 1e-9


def test_linear_combination_matches_direct_extraction():
    m0, b0 = derived_system(DETUNED)
    m1, b1 = derived_system_direct(DETUNED)
    assert np.abs(m0 - m1).max() < 1e-9
    assert np.abs(b0 - b1).max() < 1e-9


def test_stationary_uncoupled_is_zero():
    x = stationary_moments(CompositeParams(100, 100, 0.1, 1e-3, 100, 0.0)).as_array()
    assert not np.any(x)


def test_stationary_residual():
    m, b = derived_system(RESONANT)
    x = stationary_moments(RESONANT).as_array()
    assert np.linalg.norm(m @ x + b) < 1e-10 * np.linalg.norm(b)


def test_no_stationary_state_without_damping():
    with pytest.raises(NoStationaryStateError):
        stationary_moments(CompositeParams(100, 100, 0.0, 0.0, 10, 0.1))


def test_resonant_rates():
    closed = cavity_rate_closed_form(RESONANT)
    assert closed == pytest.approx(5.0e-6, rel=1e-12)
    # algebraic simplification at equal frequencies
    n, z, k, g, G, w = 100, 0.2, 0.1, 0.1, 1e-3, 100.0
    simple = n * z**2 * k * g**2 * (8 * g**2 + z * G) / (4 * z**2 * w**2 * (4 * g**2 + k * G))
    assert closed == pytest.approx(simple, rel=1e-12)
    assert cavity_rate_moments(RESONANT) == pytest.approx(closed, rel=1e-2)


def test_closed_form_zero_coupling_and_degenerate():
    assert cavity_rate_closed_form(CompositeParams(100, 100, 0.1, 1e-3, 100, 0.0)) == 0
    with pytest.raises(DegenerateParametersError):
        cavity_rate_closed_form(CompositeParams(100, 100, 0.0, 0.0, 100, 0.0))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_closed_form_scaling_law(seed, lam):
    p = regime_params(seed)
    q = CompositeParams(lam * p.omega_c, lam * p.omega_0, lam * p.kappa, lam * p.gamma, p.n_atoms, lam * p.g_c)
    assert cavity_rate_closed_form(q) == pytest.approx(lam * cavity_rate_closed_form(p), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_positivity_in_regime(seed):
    p = regime_params(seed)
    assert cavity_rate_closed_form(p) > 0
    x = stationary_moments(p)
    assert x.mu1 >= 0 and x.mu2 >= 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_closed_form_agrees_with_moments_in_regime(seed):
    p = regime_params(seed)
    assert regime_check(p, 1e-3).passed
    moment = cavity_rate_moments(p)
    assert abs(cavity_rate_closed_form(p) - moment) / moment < 1e-2


@pytest.mark.parametrize("seed", [1, 2])
def test_three_way_agreement_in_regime(seed):
    p = regime_params(seed)
    space = FockSpace(6)
    rho = steady_state(build_composite_generator(p, space, space))
    dm = emission_rate(rho, build_composite_generator(p, space, space)).channels["cavity"]
    moment = cavity_rate_moments(p)
    assert abs(dm - moment) / moment < 1e-2
    assert abs(cavity_rate_closed_form(p) - moment) / moment < 1e-2


def test_regime_examples():
    diag = regime_check(RESONANT)
    assert diag.decay_ratio == pytest.approx(1e-3)
    assert diag.coupling_ratio == pytest.approx(1e-2)
    assert diag.cavity_ratio == pytest.approx(1e-3)
    # the coupling ratio sits exactly on the threshold
    assert diag.passed
    assert not regime_check(CompositeParams(100, 100, 100, 1e-3, 100, 0.1)).passed
    with pytest.warns(RegimeWarning):
        regime_check(CompositeParams(100, 100, 100, 1e-3, 100, 0.1), warn=True)


def test_deviation_grows_past_regime_boundary():
    couplings = [0.1, 0.3, 1.0, 2.0, 3.0, 5.0]
    devs = []
    for g in couplings:
        p = CompositeParams(100, 100, 0.1, 1e-3, 100, g)
        moment = cavity_rate_moments(p)
        devs.append(abs(cavity_rate_closed_form(p) - moment) / moment)
    assert all(b > a for a, b in zip(devs, devs[1:]))
    assert devs[0] < 1e-3 < 0.1 < devs[-1]


def test_moment_trajectory_starts_at_initial_value():
    x0 = np.linspace(-1, 1, 10)
    traj = composite.moment_trajectory(RESONANT, x0, [0.0, 0.5])
    np.testing.assert_allclose(traj[0], x0, atol=1e-14)
    m, b = derived_system(RESONANT)
    # long-time limit is the stationary point
    far = composite.moment_trajectory(RESONANT, x0, [400.0])[0]
    np.testing.assert_allclose(far, stationary_moments(RESONANT).as_array(), atol=1e-9)
