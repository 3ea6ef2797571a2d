import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactlimit.cutoff import ETA_HALF_INTEGRAL, eta, eta_prime
from contactlimit.riemann import (InadmissibleStateError, default_wave, make_contact,
                                  sample_contact, well_prepared_init)
from contactlimit.thermo import (FluidPoint, adaptive_simpson, ideal_elastic, ideal_gas, pressure,
                                 relative_entropy_density)


# --- cutoff ------------------------------------------------------------------

def test_eta_exact_values():
    assert eta(-1.0) == 1.0 and eta(1.0) == 0.0 and eta(0.0) == 0.5
    assert eta(-5.0) == 1.0 and eta(7.0) == 0.0
    assert eta_prime(0.0) == -0.75
    assert eta_prime(1.0) == 0.0 and eta_prime(-1.0) == 0.0
    assert eta_prime(-0.5) == eta_prime(0.5) == -9 / 16


def test_eta_c1_and_monotone():
    h = 1e-7
    for x0 in (-1.0, 1.0):
        left = (eta(x0) - eta(x0 - h)) / h
        right = (eta(x0 + h) - eta(x0)) / h
        assert abs(left - right) < 1e-6
    x = np.linspace(-2, 2, 4001)
    assert np.all(np.diff(eta(x)) <= 0)


def test_eta_prime_even_random():
    x = np.random.default_rng(0).uniform(-2, 2, 1000)
    assert np.max(np.abs(eta_prime(x) - eta_prime(-x))) <= 1e-15


@given(st.floats(-3, 3))
def test_eta_partition_of_unity(x):
    assert eta(x) + eta(-x) == pytest.approx(1.0, abs=1e-15)


def test_eta_half_integral():
    assert adaptive_simpson(lambda x: float(eta(x)), 0.0, 1.0) == pytest.approx(ETA_HALF_INTEGRAL, rel=1e-10)


# --- contact -----------------------------------------------------------------

def test_make_contact_examples():
    w = make_contact(ideal_gas(R=1.0), FluidPoint(1.0, 0.0, 1.0), 2.0)
    assert w.right.theta == pytest.approx(2.0) and w.p_bar == pytest.approx(1.0)
    w = make_contact(ideal_elastic(gamma=2.0), FluidPoint(1.0, 0.0, 1.0), 2.0)
    assert w.p_bar == pytest.approx(2.0) and w.right.theta == pytest.approx(3.5)
    left = FluidPoint(1.5, 0.2, 0.7)
    assert make_contact(ideal_gas(), left, 1.5).right == left


def test_make_contact_errors():
    with pytest.raises(InadmissibleStateError):
        # p_bar = 2 but p_e(0.5) = 4 leaves no room for a positive temperature
        make_contact(ideal_elastic(gamma=2.0), FluidPoint(1.0, 0.0, 1.0), 0.5)
    with pytest.raises(ValueError):
        make_contact(ideal_gas(), FluidPoint(1.0, 0.0, 1.0), -1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10), st.floats(0.1, 10))
def test_contact_admissible_property(tl, v, thl, tr):
    gas = ideal_gas(R=1.0)
    w = make_contact(gas, FluidPoint(tl, v, thl), tr)
    adm = w.admissibility(gas)
    assert adm["admissible"]
    assert w.left.v == w.right.v == w.v_bar
    assert abs(pressure(gas, w.left) - pressure(gas, w.right)) <= 1e-12 * max(1.0, w.p_bar)


def test_sample_contact():
    gas, w = default_wave()
    assert sample_contact(w, -1.0, 5.0) == w.left
    moving = make_contact(gas, FluidPoint(1.0, 2.0, 1.0), 2.0)
    assert sample_contact(moving, 3.0, 1.0) == moving.right
    assert sample_contact(moving, 2.0, 1.0) == moving.left
    arr = sample_contact(w, np.array([-0.1, 0.0, 0.1]))
    assert np.array_equal(arr.tau, [1.0, 1.0, 2.0])


# --- well-prepared data ------------------------------------------------------

def test_profile_far_states_exact():
    gas, w = default_wave()
    prof = well_prepared_init(gas, w, 0.05)
    assert prof(-0.1) == FluidPoint(w.left.tau, w.v_bar, w.left.theta)
    assert prof(0.1) == FluidPoint(w.right.tau, w.v_bar, w.right.theta)


@pytest.mark.parametrize("gas", [ideal_gas(), ideal_elastic(gamma=2.0)], ids=lambda g: g.name)
def test_profile_isobaric(gas):
    w = make_contact(gas, FluidPoint(1.0, 0.0, 1.0), 1.6)
    prof = well_prepared_init(gas, w, 0.1)
    x = np.linspace(-0.2, 0.2, 1001)
    u = prof(x)
    assert np.max(np.abs(gas.pressure(u.tau, u.theta) - w.p_bar)) <= 1e-12 * max(1, w.p_bar)
    assert np.all(u.v == w.v_bar)


def test_profile_rejects_nonpositive_delta():
    gas = ideal_elastic(gamma=2.0)
    w = make_contact(gas, FluidPoint(1.0, 0.0, 1.0), 2.0)
    with pytest.raises(ValueError):
        well_prepared_init(gas, w, 0.0)


def test_profile_converges_pointwise():
    gas, w = default_wave()
    for x in (-0.3, -0.01, 0.02, 0.4):
        ref = sample_contact(w, x)
        u = well_prepared_init(gas, w, 1e-3)(x)
        assert (u.tau, u.theta) == (ref.tau, ref.theta)


def _initial_entropy(gas, w, delta):
    """Continuum E(0) by adaptive quadrature across the layer."""
    prof = well_prepared_init(gas, w, delta)

    def f(x):
        u = prof(x)
        r = sample_contact(w, x)
        return float(relative_entropy_density(gas, FluidPoint(u.tau, u.v, u.theta), r))

    return (adaptive_simpson(f, -delta, 0.0, rtol=1e-9) + adaptive_simpson(f, 0.0, delta, rtol=1e-9))


def test_initial_entropy_linear_in_delta():
    gas, w = default_wave()
    e = {d: _initial_entropy(gas, w, d) for d in (1e-1, 1e-2, 1e-3, 1e-4)}
    assert e[1e-2] / e[1e-3] == pytest.approx(10.0, rel=0.2)
    ratios = [v / d for d, v in e.items()]
    assert max(ratios) / min(ratios) < 1.01 and min(ratios) > 0
