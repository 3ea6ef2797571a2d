import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactlimit.thermo import (DomainError, FluidPoint, GasModel, ModelError, adaptive_simpson,
                                 entropy, ideal_elastic, ideal_gas, internal_energy, make_gas,
                                 pressure, relative_entropy_density, relative_entropy_flux_density,
                                 tail_ratio_bound, thermal_power)


def elastic_2():
    # p_e = tau^-2, p_theta = 1/tau
    return ideal_elastic(R=1.0, A=1.0, gamma=2.0, cv=1.5)


def quadrature_gas():
    """Same physics as elastic_2 but every potential by numeric quadrature."""
    return GasModel(p_e=lambda t: t ** -2.0, p_theta=lambda t: 1.0 / t,
                    c_v=lambda th: 1.0 + 0.5 * th / (1.0 + th))


# --- pressure / energy / entropy -------------------------------------------

def test_pressure_examples():
    assert pressure(ideal_gas(R=1.0), FluidPoint(2.0, 0.0, 3.0)) == pytest.approx(1.5, abs=1e-15)
    assert pressure(elastic_2(), FluidPoint(1.0, 0.0, 1.0)) == pytest.approx(2.0, abs=1e-15)


def test_increasing_elastic_pressure_rejected():
    with pytest.raises(ModelError):
        GasModel(p_e=lambda t: t, p_theta=lambda t: 1.0 / t, c_v=lambda th: 1.0 + 0 * th)


def test_negative_cv_rejected():
    with pytest.raises(ModelError):
        GasModel(p_e=lambda t: 0 * t, p_theta=lambda t: 1.0 / t, c_v=lambda th: -1.0 + 0 * th)


@pytest.mark.parametrize("bad", [FluidPoint(0.0, 0.0, 1.0), FluidPoint(1.0, 0.0, -1.0)])
def test_domain_errors(bad):
    gas = ideal_gas()
    for fn in (pressure, internal_energy, entropy):
        with pytest.raises(DomainError):
            fn(gas, bad)
    with pytest.raises(DomainError):
        relative_entropy_density(gas, bad, FluidPoint(1.0, 0.0, 1.0))


def test_internal_energy_examples():
    assert internal_energy(ideal_gas(cv=1.5), FluidPoint(5.0, 0.0, 2.0)) == pytest.approx(3.0)
    gas = elastic_2()
    assert internal_energy(gas, FluidPoint(2.0, 0.0, 2.0)) == pytest.approx(3.5)
    assert internal_energy(gas, FluidPoint(2.0, 7.0, 2.0)) == internal_energy(gas, FluidPoint(2.0, 0.0, 2.0))


def test_entropy_examples():
    gas = ideal_gas(R=1.0, cv=1.0)
    assert entropy(gas, FluidPoint(1.0, 0.0, 1.0)) == 0.0
    assert entropy(gas, FluidPoint(1.0, 0.0, math.e)) == pytest.approx(1.0, abs=1e-15)
    assert entropy(gas, FluidPoint(math.e, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_reference_conventions():
    for gas in (ideal_gas(), elastic_2(), thermal_power(), quadrature_gas()):
        assert gas.P_theta(gas.tau_ref) == pytest.approx(0.0, abs=1e-14)
        assert gas.S(gas.theta_ref) == pytest.approx(0.0, abs=1e-14)
    # elastic potential vanishes at +inf for the elastic catalog model
    assert elastic_2().P_e(1e12) == pytest.approx(0.0, abs=1e-11)


def test_make_gas_by_name():
    assert make_gas("ideal").name == "ideal"
    assert make_gas("ideal_elastic", gamma=3.0).gamma == 3.0
    assert make_gas("thermal_power", B=2.0).name == "thermal_power"
    with pytest.raises(ValueError):
        make_gas("van_der_waals")
    with pytest.raises(ModelError):
        make_gas("ideal_elastic", gamma=1.5)


def test_adaptive_simpson_oracle():
    assert adaptive_simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-10)
    assert adaptive_simpson(lambda z: 1 / z, 1.0, 10.0) == pytest.approx(math.log(10), rel=1e-10)


def test_quadrature_fallback_matches_closed_form():
    num = GasModel(p_e=lambda t: t ** -2.0, p_theta=lambda t: 1.0 / t, c_v=lambda th: 1.5 + 0 * th,
                   elastic_tau_ref=1.0)
    ref = ideal_elastic(gamma=2.0, cv=1.5)
    tau = np.array([0.3, 1.0, 2.5])
    # potentials differ only by their integration constants
    shift = ref.P_e(1.0)
    assert np.allclose(num.P_e(tau) + shift, ref.P_e(tau), rtol=1e-9)
    assert np.allclose(num.P_theta(tau), ref.P_theta(tau), rtol=1e-9, atol=1e-12)
    th = np.array([0.5, 2.0])
    assert np.allclose(num.S(th), ref.S(th), rtol=1e-9)
    assert np.allclose(num.temperature(tau[:2], num.energy(tau[:2], th)), th, rtol=1e-12)


# --- derivative consistency --------------------------------------------------

@pytest.mark.parametrize("gas", [ideal_gas(), elastic_2(), thermal_power(gamma=3.0), quadrature_gas()],
                         ids=["ideal", "elastic", "power", "quadrature"])
def test_potential_derivatives(gas):
    tau = np.logspace(-1, 1, 100)
    theta = np.logspace(-1, 1, 100)
    h = 1e-5
    fd = lambda f, x: (f(x * (1 + h)) - f(x * (1 - h))) / (2 * h * x)
    assert np.allclose(-fd(gas.P_e, tau), gas.p_e(tau), rtol=1e-6, atol=1e-10)
    assert np.allclose(-fd(gas.P_theta, tau), gas.p_theta(tau), rtol=1e-6)
    assert np.allclose(fd(gas.Q, theta), gas.c_v(theta), rtol=1e-6)
    # theta ds = de + p dtau, variable by variable
    s_theta = fd(lambda z: gas.entropy(1.3, z), theta)
    assert np.allclose(theta * s_theta, gas.c_v(theta), rtol=1e-6)
    s_tau = fd(lambda t: gas.entropy(t, 0.8), tau)
    assert np.allclose(s_tau, gas.p_theta(tau), rtol=1e-6)


# --- relative entropy ----------------------------------------------------------

def test_relative_entropy_examples():
    gas = ideal_gas(R=1.0, cv=1.0)
    ref = FluidPoint(1.3, 0.4, 1.7)
    assert relative_entropy_density(gas, ref, ref) == 0.0
    assert relative_entropy_density(gas, FluidPoint(1.3, 2.4, 1.7), ref) == pytest.approx(2.0)
    val = relative_entropy_density(gas, FluidPoint(1.0, 0.0, 2.0), FluidPoint(1.0, 0.0, 1.0))
    assert val == pytest.approx(1 - math.log(2), abs=1e-14)
    # quadrature cross-check of the Q-bracket
    q = 1.0 - 1.0 * adaptive_simpson(lambda z: 1.0 / z, 1.0, 2.0)
    assert val == pytest.approx(q, rel=1e-9)


@pytest.mark.parametrize("gas", [ideal_gas(), elastic_2(), thermal_power()], ids=lambda g: g.name)
def test_relative_entropy_nonnegative_random(gas):
    rng = np.random.default_rng(7)
    n = 10_000
    pt = FluidPoint(rng.uniform(0.05, 10, n), rng.normal(0, 2, n), rng.uniform(0.05, 10, n))
    ref = FluidPoint(rng.uniform(0.05, 10, n), rng.normal(0, 2, n), rng.uniform(0.05, 10, n))
    assert np.min(relative_entropy_density(gas, pt, ref)) >= 0.0
    assert np.max(np.abs(relative_entropy_density(gas, ref, ref))) <= 1e-12


def test_relative_entropy_quadratic_near_diagonal():
    gas = elastic_2()
    ref = FluidPoint(1.2, 0.3, 0.9)
    d = np.array([0.3, -0.2, 0.25])
    ratios = []
    for k in range(1, 11):
        h = d * 2.0 ** -k
        pt = FluidPoint(ref.tau + h[0], ref.v + h[1], ref.theta + h[2])
        ratios.append(relative_entropy_density(gas, pt, ref) / np.sum(h * h))
    ratios = np.array(ratios)
    assert ratios.min() > 0.05 and ratios.max() < 5.0
    assert ratios.max() / ratios.min() < 1.5


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 100), st.floats(-10, 10), st.floats(0.01, 100),
       st.floats(0.01, 100), st.floats(-10, 10), st.floats(0.01, 100))
def test_relative_entropy_nonnegative_property(t, v, th, tb, vb, thb):
    gas = elastic_2()
    val = relative_entropy_density(gas, FluidPoint(t, v, th), FluidPoint(tb, vb, thb))
    scale = 1 + abs(gas.energy(t, th)) + thb * abs(gas.entropy(t, th)) + v * v
    assert val >= -1e-12 * scale


def test_flux_examples():
    gas = ideal_gas(R=1.0)
    ref = FluidPoint(1.0, 0.0, 1.0)  # p_bar = 1
    assert relative_entropy_flux_density(gas, ref, ref) == 0.0
    pt = FluidPoint(0.5, 1.0, 1.0)   # p = 2
    assert relative_entropy_flux_density(gas, pt, ref) == pytest.approx(-1.0)


def test_flux_componentwise_oracle():
    gas = elastic_2()
    pt, ref = FluidPoint(0.7, 1.3, 2.1), FluidPoint(1.4, -0.4, 0.8)
    p, pb = pressure(gas, pt), pressure(gas, ref)
    ds = np.array([pb, -ref.v, 1.0]) / ref.theta
    df = np.array([-pt.v, p, p * pt.v]) - np.array([-ref.v, pb, pb * ref.v])
    assert relative_entropy_flux_density(gas, pt, ref) == pytest.approx(-ds @ df, rel=1e-14)


# --- tail ratio --------------------------------------------------------------

def test_tail_ratio_finite_for_elastic_gamma2():
    b = tail_ratio_bound(elastic_2(), FluidPoint(1.0, 0.0, 1.0), 10.0, 1e-6)
    assert np.isfinite(b.sup) and not b.diverges


def test_tail_ratio_diverges_for_ideal_gas():
    b = tail_ratio_bound(ideal_gas(R=1.0), FluidPoint(1.0, 0.0, 1.0), 10.0, 1e-6)
    assert b.diverges


def test_tail_ratio_single_point_window():
    gas = elastic_2()
    b = tail_ratio_bound(gas, FluidPoint(1.0, 0.0, 1.0), 10.0, 0.1)
    assert not b.diverges and b.sup == b.ratio_at_edge == b.ratio_at_min


@pytest.mark.parametrize("C1,tau_min", [(0.5, 1e-3), (10.0, 0.5), (-1.0, 1e-3)])
def test_tail_ratio_invalid_window(C1, tau_min):
    with pytest.raises(ValueError):
        tail_ratio_bound(ideal_gas(), FluidPoint(1.0, 0.0, 1.0), C1, tau_min)
