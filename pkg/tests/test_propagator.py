import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from collective_decay import propagator
from collective_decay.errors import NumericalError
from collective_decay.propagator import BathSpec, PropagatorParams


def test_initial_conditions():
    for gamma, r in [(1.0, 0.1), (1.0, 0.5), (1.0, 10.0), (0.0, 1.0)]:
        p = PropagatorParams(gamma, r)
        assert propagator.phi(0.0, p) == pytest.approx(1.0, abs=1e-15)
        assert propagator.phi_dot(0.0, p) == pytest.approx(0.0, abs=1e-15)


def test_bad_cavity_value_from_ode_oracle():
    # frozen from the RK4 oracle at dt = 1e-4
    assert propagator.phi(10.0, PropagatorParams(1.0, 0.1)) == pytest.approx(0.913234, abs=1e-6)


def test_good_cavity_value_from_ode_oracle():
    assert propagator.phi(0.2, PropagatorParams(1.0, 10.0)) == pytest.approx(-0.33325, abs=1e-5)


def test_harmonic_and_decoupled_limits():
    t = np.linspace(0, 50, 501)
    assert np.allclose(propagator.phi(t, PropagatorParams(0.0, 1.3)), np.cos(1.3 * t), atol=1e-12)
    assert np.allclose(propagator.phi(t, PropagatorParams(2.0, 0.0)), 1.0, atol=1e-14)


def test_scalar_and_array_shapes():
    p = PropagatorParams(1.0, 0.3)
    assert np.ndim(propagator.phi(1.0, p)) == 0
    assert propagator.phi(np.zeros((2, 3)), p).shape == (2, 3)


def test_critical_damping_is_continuous():
    t = np.linspace(0, 30, 301)
    crit = propagator.phi(t, PropagatorParams(1.0, 0.5))
    for r in (0.5 - 1e-7, 0.5 + 1e-7):
        assert np.allclose(propagator.phi(t, PropagatorParams(1.0, r)), crit, atol=1e-6)
    # Omega = 0: Phi = e^{-t/2} (1 + t/2)
    assert np.allclose(crit, np.exp(-t / 2) * (1 + t / 2), atol=1e-13)


def test_small_x_series_matches_direct_evaluation():
    p = PropagatorParams(1.0, 0.3)
    t = np.array([1e-5, 1e-4, 1.5e-3])
    w = math.sqrt(1 - 4 * 0.09)
    direct = np.exp(-t / 2) * (np.cosh(w * t / 2) + np.sinh(w * t / 2) / w)
    assert np.allclose(propagator.phi(t, p), direct, rtol=0, atol=1e-15)


def test_phi_dot_matches_finite_difference():
    for gamma, r in [(1.0, 0.1), (1.0, 10.0), (0.0, 2.0), (1.0, 0.5)]:
        p = PropagatorParams(gamma, r)
        t = np.linspace(0.05, 5, 40)
        h = 1e-6
        fd = (propagator.phi(t + h, p) - propagator.phi(t - h, p)) / (2 * h)
        assert np.allclose(propagator.phi_dot(t, p), fd, atol=1e-6 * max(1, r))


def test_markov_limit_for_weak_coupling():
    p = PropagatorParams(1.0, 0.01)
    t = np.linspace(0, 5e4, 20001)
    assert np.max(np.abs(propagator.phi(t, p) - propagator.phi_markov(t, p))) < 2e-4
    with pytest.raises(ValueError):
        propagator.phi_markov(1.0, PropagatorParams(0.0, 1.0))


def test_late_rates_in_bad_cavity():
    p = PropagatorParams(1.0, 0.1)
    late = propagator.decay_rate(np.array([200.0, 1e4]), p)
    assert np.allclose(late, p.slow_rate, rtol=1e-12)
    assert p.slow_rate == pytest.approx(0.0202041028867, rel=1e-10)
    # amplitude rate against the Markov rate r^2/gamma
    assert propagator.amplitude_rate(400.0, p) == pytest.approx(p.markov_rate, rel=0.05)


def test_decay_rate_stays_finite_when_phi_underflows():
    p = PropagatorParams(1.0, 0.1)
    assert propagator.phi(1e6, p) == 0.0
    assert propagator.decay_rate(1e6, p) == pytest.approx(p.slow_rate, rel=1e-12)


def test_critical_decay_rate_closed_form():
    t = np.linspace(0, 20, 201)
    expected = 2 * 0.25 * t / (1 + t / 2)
    assert np.allclose(propagator.decay_rate(t, PropagatorParams(1.0, 0.5)), expected, atol=1e-13)


def test_good_cavity_has_negative_rate_and_poles():
    p = PropagatorParams(1.0, 10.0)
    t = np.linspace(0, 0.5, 2001)
    rates = propagator.decay_rate(t, p)
    assert np.nanmin(rates) < 0
    zero = propagator.first_phi_zero(p)
    assert propagator.phi(zero, p) == pytest.approx(0.0, abs=1e-14)
    assert np.all(propagator.phi(np.linspace(0, zero, 200)[:-1], p) > 0)
    assert np.isnan(propagator.decay_rate(zero, p))


def test_first_zero_absent_when_overdamped():
    assert propagator.first_phi_zero(PropagatorParams(1.0, 0.5)) is None
    assert propagator.first_phi_zero(PropagatorParams(0.0, 2.0)) == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("R, expected", [(0.01, True), (0.1, True), (0.5, True), (0.6, False), (1.0, False), (10.0, False)])
def test_cp_divisibility(R, expected):
    assert propagator.is_cp_divisible(PropagatorParams.from_ratio(R)) is expected


def test_bath_spec_and_effective_rate():
    bath = BathSpec(0.04, 2.0)
    assert bath.effective_rate(3.0) == pytest.approx(0.6)
    p = PropagatorParams.from_bath(bath, 3.0)
    assert (p.gamma, p.r) == (2.0, pytest.approx(0.6))
    assert bath.spectral_density(0.0) == pytest.approx(0.04 / (2.0 * math.pi))
    assert propagator.correlation(0.0, bath) == pytest.approx(0.04)
    assert propagator.correlation(0.5, bath) == pytest.approx(0.04 * math.exp(-1.0))


@pytest.mark.parametrize("args", [(-1.0, 1.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
def test_bath_spec_rejects_bad_input(args):
    with pytest.raises(ValueError):
        BathSpec(*args)


def test_params_reject_bad_input():
    with pytest.raises(ValueError):
        PropagatorParams(-1.0, 1.0)
    with pytest.raises(ValueError):
        PropagatorParams(1.0, math.nan)


def test_numerical_error_is_arithmetic():
    assert issubclass(NumericalError, ArithmeticError)


@settings(max_examples=200, deadline=None)
@given(
    gamma=st.floats(0.0, 5.0),
    r=st.floats(0.0, 20.0),
    t=st.floats(0.0, 200.0),
)
def test_phi_is_bounded(gamma, r, t):
    assume(gamma > 0 or r > 0)
    value = propagator.phi(t, PropagatorParams(gamma, r))
    assert abs(value) <= 1.0 + 1e-12


@settings(max_examples=100, deadline=None)
@given(R=st.floats(0.001, 0.5), t=st.floats(0.0, 500.0))
def test_overdamped_phi_is_positive_and_rate_nonnegative(R, t):
    p = PropagatorParams.from_ratio(R)
    assert propagator.phi(t, p) > 0 or propagator.phi(t, p) == 0.0
    assert propagator.decay_rate(t, p) >= 0
