"""Feireisl-type equations of state and relative-entropy densities.

The pressure splits into an elastic part and a thermal part linear in the
temperature,

    p(tau, theta) = p_e(tau) + theta * p_theta(tau),

with internal energy e = P_e(tau) + Q(theta) and entropy
s = S(theta) - P_theta(tau), where

    P_e(tau)     = -int_{tau_ref}^{tau} p_e
    P_theta(tau) = -int_{tau_ref}^{tau} p_theta
    Q(theta)     =  int_{theta_ref}^{theta} C_v
    S(theta)     =  int_{theta_ref}^{theta} C_v(z)/z dz

Integration constants only shift absolute energies and entropies; every
relative quantity below is independent of them.  The catalog models carry
closed-form potentials; generic models fall back to adaptive Simpson
quadrature from the reference points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np


class DomainError(ValueError):
    """Raised for non-positive specific volume or temperature."""


class ModelError(ValueError):
    """Raised when a gas model violates the structural conditions."""


@dataclass(frozen=True)
class FluidPoint:
    """A fluid state (specific volume, velocity, temperature).

    Fields may be scalars or equally shaped numpy arrays.
    """

    tau: float
    v: float
    theta: float

    def check(self) -> None:
        _check_positive(self.tau, self.theta)


def _check_positive(tau, theta=None) -> None:
    if np.any(~(np.asarray(tau) > 0)):
        raise DomainError("specific volume must be positive")
    if theta is not None and np.any(~(np.asarray(theta) > 0)):
        raise DomainError("temperature must be positive")


# ----------------------------------------------------------------------------
# quadrature fallback

def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     rtol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate ``f`` over [a, b] by adaptive Simpson with Richardson correction."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # absolute floor so integrals that cancel to zero still terminate
    tol = rtol * max(abs(whole), 1e-300) + 1e-300
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, rtol)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth, rtol):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * max(tol, rtol * abs(left + right)):
        return left + right + delta / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, rtol)
            + _simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, rtol))


def _integrate_from(f, ref, x):
    """Vectorised int_ref^x f for scalar or array x."""
    if np.isinf(ref):
        raise ModelError("an infinite reference point needs a closed-form potential")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return adaptive_simpson(f, ref, float(x))
    return np.array([adaptive_simpson(f, ref, float(xi)) for xi in x.ravel()]).reshape(x.shape)


# ----------------------------------------------------------------------------
# gas model

VALIDATION_TAU = np.logspace(-4, 4, 1000)
VALIDATION_THETA = np.logspace(-4, 4, 200)


@dataclass(frozen=True)
class GasModel:
    """State-equation family p = p_e(tau) + theta p_theta(tau), e = P_e + Q.

    ``elastic_tau_ref`` and ``energy_theta_ref`` default to ``tau_ref`` and
    ``theta_ref``.  ``elastic_tau_ref = inf`` is allowed when p_e has an
    integrable tail and ``energy_theta_ref = 0`` when C_v is integrable at 0,
    both only together with a closed-form potential.
    """

    p_e: Callable
    p_theta: Callable
    c_v: Callable
    tau_ref: float = 1.0
    theta_ref: float = 1.0
    elastic_tau_ref: Optional[float] = None
    energy_theta_ref: Optional[float] = None
    gamma: Optional[float] = None
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    # closed forms; None means quadrature fallback
    elastic_potential: Optional[Callable] = None
    thermal_potential: Optional[Callable] = None
    thermal_energy: Optional[Callable] = None
    thermal_entropy: Optional[Callable] = None
    thermal_energy_inverse: Optional[Callable] = None
    # exact derivative callbacks p_e', p_theta'
    dp_e: Optional[Callable] = None
    dp_theta: Optional[Callable] = None

    def __post_init__(self):
        if self.elastic_tau_ref is None:
            object.__setattr__(self, "elastic_tau_ref", self.tau_ref)
        if self.energy_theta_ref is None:
            object.__setattr__(self, "energy_theta_ref", self.theta_ref)
        if not (self.tau_ref > 0 and np.isfinite(self.tau_ref)):
            raise ModelError("tau_ref must be positive and finite")
        if not (self.theta_ref > 0 and np.isfinite(self.theta_ref)):
            raise ModelError("theta_ref must be positive and finite")
        if self.gamma is not None and self.gamma < 2:
            raise ModelError("a declared power-law tail needs gamma >= 2")
        self._validate()

    def _validate(self):
        tau = VALIDATION_TAU
        pe = np.asarray(self.p_e(tau), dtype=float) * np.ones_like(tau)
        pt = np.asarray(self.p_theta(tau), dtype=float) * np.ones_like(tau)
        if np.any(pe < 0) or np.any(pt < 0):
            raise ModelError("p_e and p_theta must be non-negative")
        for name, vals, deriv in (("p_e", pe, self.dp_e), ("p_theta", pt, self.dp_theta)):
            if deriv is not None:
                if np.any(np.asarray(deriv(tau)) > 0):
                    raise ModelError(f"{name} must be non-increasing")
            elif np.any(np.diff(vals) > 1e-12 * np.max(np.abs(vals))):
                raise ModelError(f"{name} must be non-increasing")
        cv = np.asarray(self.c_v(VALIDATION_THETA), dtype=float) * np.ones_like(VALIDATION_THETA)
        if np.any(~(cv > 0)):
            raise ModelError("C_v must be positive")
        checks = (
            (self.elastic_potential, self.elastic_tau_ref),
            (self.thermal_potential, self.tau_ref),
            (self.thermal_energy, self.energy_theta_ref),
            (self.thermal_entropy, self.theta_ref),
        )
        for fn, ref in checks:
            if fn is not None and np.isfinite(ref) and ref > 0:
                if abs(float(fn(ref))) > 1e-12:
                    raise ModelError("closed-form potential does not vanish at its reference")
        if self.elastic_potential is None and not np.isfinite(self.elastic_tau_ref):
            raise ModelError("elastic_tau_ref = inf requires a closed-form elastic potential")
        if self.thermal_energy is None and not self.energy_theta_ref > 0:
            raise ModelError("energy_theta_ref = 0 requires a closed-form thermal energy")

    # potentials -------------------------------------------------------------

    def P_e(self, tau):
        if self.elastic_potential is not None:
            return self.elastic_potential(tau)
        return -_integrate_from(self.p_e, self.elastic_tau_ref, tau)

    def P_theta(self, tau):
        if self.thermal_potential is not None:
            return self.thermal_potential(tau)
        return -_integrate_from(self.p_theta, self.tau_ref, tau)

    def Q(self, theta):
        if self.thermal_energy is not None:
            return self.thermal_energy(theta)
        return _integrate_from(self.c_v, self.energy_theta_ref, theta)

    def S(self, theta):
        """int_{theta_ref}^{theta} C_v(z)/z dz."""
        if self.thermal_entropy is not None:
            return self.thermal_entropy(theta)
        return _integrate_from(lambda z: self.c_v(z) / z, self.theta_ref, theta)

    def S_between(self, theta_from, theta_to):
        """int_{theta_from}^{theta_to} C_v(z)/z dz, with no reference dependence."""
        if self.thermal_entropy is not None:
            return self.thermal_entropy(theta_to) - self.thermal_entropy(theta_from)
        a = np.broadcast_to(np.asarray(theta_from, float), np.broadcast(theta_from, theta_to).shape)
        b = np.broadcast_to(np.asarray(theta_to, float), a.shape)
        g = lambda z: self.c_v(z) / z
        if a.ndim == 0:
            return adaptive_simpson(g, float(a), float(b))
        return np.array([adaptive_simpson(g, float(x), float(y))
                         for x, y in zip(a.ravel(), b.ravel())]).reshape(a.shape)

    def dpe(self, tau):
        if self.dp_e is not None:
            return self.dp_e(tau)
        h = 1e-6 * np.asarray(tau)
        return (self.p_e(tau + h) - self.p_e(tau - h)) / (2 * h)

    def dptheta(self, tau):
        if self.dp_theta is not None:
            return self.dp_theta(tau)
        h = 1e-6 * np.asarray(tau)
        return (self.p_theta(tau + h) - self.p_theta(tau - h)) / (2 * h)

    # state functions (no domain checks: hot path for the solver) -------------

    def pressure(self, tau, theta):
        return self.p_e(tau) + theta * self.p_theta(tau)

    def energy(self, tau, theta):
        return self.P_e(tau) + self.Q(theta)

    def entropy(self, tau, theta):
        return self.S(theta) - self.P_theta(tau)

    def temperature(self, tau, e):
        """Invert e = P_e(tau) + Q(theta) for theta."""
        q = e - self.P_e(tau)
        if self.thermal_energy_inverse is not None:
            return self.thermal_energy_inverse(q)
        return self._invert_q(q)

    def _invert_q(self, q, theta0=None):
        q = np.asarray(q, dtype=float)
        th = np.ones_like(q) if theta0 is None else np.array(theta0, dtype=float)
        for _ in range(100):
            step = (self.Q(th) - q) / self.c_v(th)
            th = np.maximum(th - step, 0.5 * th)
            if np.all(np.abs(step) <= 1e-14 * th):
                break
        return th

    def isentropic_modulus(self, tau, theta):
        """-dp/dtau at fixed entropy: -p_e' - theta p_theta' + theta p_theta^2 / C_v."""
        pt = self.p_theta(tau)
        return -self.dpe(tau) - theta * self.dptheta(tau) + theta * pt ** 2 / self.c_v(theta)


# ----------------------------------------------------------------------------
# catalog

def _const(c):
    return lambda x: c * np.ones_like(np.asarray(x, dtype=float))


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _constant_cv_forms(cv, theta_ref, energy_theta_ref):
    return dict(
        c_v=_const(cv),
        thermal_energy=lambda th: cv * (th - energy_theta_ref),
        thermal_entropy=lambda th: cv * np.log(th / theta_ref),
        thermal_energy_inverse=lambda q: q / cv + energy_theta_ref,
    )


def ideal_gas(R=1.0, cv=1.5, tau_ref=1.0, theta_ref=1.0, energy_theta_ref=0.0) -> GasModel:
    """p = R theta / tau, e = C_v (theta - energy_theta_ref)."""
    return GasModel(
        p_e=_zero,
        p_theta=lambda t: R / t,
        tau_ref=tau_ref,
        theta_ref=theta_ref,
        elastic_tau_ref=tau_ref,
        energy_theta_ref=energy_theta_ref,
        name="ideal",
        params=dict(R=R, cv=cv),
        elastic_potential=_zero,
        thermal_potential=lambda t: -R * np.log(t / tau_ref),
        dp_e=_zero,
        dp_theta=lambda t: -R / t ** 2,
        **_constant_cv_forms(cv, theta_ref, energy_theta_ref),
    )


def ideal_elastic(R=1.0, A=1.0, gamma=2.0, cv=1.5, tau_ref=1.0, theta_ref=1.0,
                  energy_theta_ref=0.0) -> GasModel:
    """Ideal gas plus elastic pressure A tau^-gamma, with P_e(+inf) = 0."""
    if gamma < 2:
        raise ModelError("elastic tail needs gamma >= 2")
    return GasModel(
        p_e=lambda t: A * t ** (-gamma),
        p_theta=lambda t: R / t,
        tau_ref=tau_ref,
        theta_ref=theta_ref,
        elastic_tau_ref=math.inf,
        energy_theta_ref=energy_theta_ref,
        gamma=gamma,
        name="ideal_elastic",
        params=dict(R=R, A=A, gamma=gamma, cv=cv),
        elastic_potential=lambda t: A * t ** (1.0 - gamma) / (gamma - 1.0),
        thermal_potential=lambda t: -R * np.log(t / tau_ref),
        dp_e=lambda t: -gamma * A * t ** (-gamma - 1.0),
        dp_theta=lambda t: -R / t ** 2,
        **_constant_cv_forms(cv, theta_ref, energy_theta_ref),
    )


def thermal_power(B=1.0, gamma=2.0, cv=1.5, tau_ref=1.0, theta_ref=1.0,
                  energy_theta_ref=0.0) -> GasModel:
    """No elastic part; p_theta = B tau^-gamma."""
    if gamma < 2:
        raise ModelError("thermal tail needs gamma >= 2")
    g1 = gamma - 1.0
    return GasModel(
        p_e=_zero,
        p_theta=lambda t: B * t ** (-gamma),
        tau_ref=tau_ref,
        theta_ref=theta_ref,
        elastic_tau_ref=tau_ref,
        energy_theta_ref=energy_theta_ref,
        gamma=gamma,
        name="thermal_power",
        params=dict(B=B, gamma=gamma, cv=cv),
        elastic_potential=_zero,
        thermal_potential=lambda t: B * (t ** (-g1) - tau_ref ** (-g1)) / g1,
        dp_e=_zero,
        dp_theta=lambda t: -gamma * B * t ** (-gamma - 1.0),
        **_constant_cv_forms(cv, theta_ref, energy_theta_ref),
    )


GAS_CATALOG = {
    "ideal": ideal_gas,
    "ideal_elastic": ideal_elastic,
    "thermal_power": thermal_power,
}


def make_gas(name: str, **params) -> GasModel:
    """Build a catalog model by name; unknown keyword parameters are rejected."""
    try:
        factory = GAS_CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown gas model {name!r}; choose from {sorted(GAS_CATALOG)}") from None
    return factory(**params)


# ----------------------------------------------------------------------------
# pointwise operations

def pressure(gas: GasModel, pt: FluidPoint):
    pt.check()
    return gas.pressure(pt.tau, pt.theta)


def internal_energy(gas: GasModel, pt: FluidPoint):
    pt.check()
    return gas.energy(pt.tau, pt.theta)


def entropy(gas: GasModel, pt: FluidPoint):
    pt.check()
    return gas.entropy(pt.tau, pt.theta)


def volume_brackets(gas: GasModel, tau, tau_bar, theta_bar):
    """theta_bar (P_theta bracket) + (P_e bracket); the tau-part of the relative entropy."""
    thermal = gas.P_theta(tau) - gas.P_theta(tau_bar) + gas.p_theta(tau_bar) * (tau - tau_bar)
    elastic = gas.P_e(tau) - gas.P_e(tau_bar) + gas.p_e(tau_bar) * (tau - tau_bar)
    return theta_bar * thermal + elastic


def _density(gas, tau, v, theta, tau_bar, v_bar, theta_bar):
    vol = volume_brackets(gas, tau, tau_bar, theta_bar)
    heat = gas.Q(theta) - gas.Q(theta_bar) - theta_bar * gas.S_between(theta_bar, theta)
    return vol + heat + 0.5 * (v - v_bar) ** 2


def relative_entropy_density(gas: GasModel, pt: FluidPoint, ref: FluidPoint):
    """-theta_bar s(U | U_bar): non-negative, zero at pt = ref."""
    pt.check()
    ref.check()
    return _density(gas, pt.tau, pt.v, pt.theta, ref.tau, ref.v, ref.theta)


def relative_entropy_flux_density(gas: GasModel, pt: FluidPoint, ref: FluidPoint):
    """q(U; U_bar) = -ds(U_bar) . (f(U) - f(U_bar)), f = (-v, p, p v).

    ds is taken in the conserved variables (tau, v, E) and equals
    (p_bar, -v_bar, 1) / theta_bar.
    """
    pt.check()
    ref.check()
    p = gas.pressure(pt.tau, pt.theta)
    pb = gas.pressure(ref.tau, ref.theta)
    vb, thb = ref.v, ref.theta
    return -((pb / thb) * (-(pt.v - vb)) - (vb / thb) * (p - pb) + (p * pt.v - pb * vb) / thb)


class TailBound(NamedTuple):
    sup: float
    diverges: bool
    ratio_at_min: float
    ratio_at_edge: float


def tail_ratio_bound(gas: GasModel, ref: FluidPoint, C1: float, tau_min: float,
                     n: int = 2001, divergence_factor: float = 10.0) -> TailBound:
    """Supremum of (1/tau) / volume-brackets over tau in [tau_min, 1/C1].

    A finite limit as tau -> 0 is what a tail p ~ tau^-gamma, gamma >= 2, in
    p_e or p_theta buys.  ``diverges`` is set when the ratio at ``tau_min``
    exceeds the ratio at ``1/C1`` by more than ``divergence_factor``.
    """
    ref.check()
    if not C1 > 0 or not tau_min > 0:
        raise ValueError("C1 and tau_min must be positive")
    edge = 1.0 / C1
    if not C1 > 1.0 / ref.tau:
        raise ValueError("C1 must exceed 1/tau_bar so the window excludes tau_bar")
    if tau_min > edge:
        raise ValueError("tau_min must not exceed 1/C1")
    taus = np.logspace(np.log10(tau_min), np.log10(edge), n) if tau_min < edge else np.array([edge])
    taus[-1] = edge
    ratio = (1.0 / taus) / volume_brackets(gas, taus, ref.tau, ref.theta)
    r_min, r_edge = float(ratio[0]), float(ratio[-1])
    return TailBound(float(np.max(ratio)), bool(r_min > divergence_factor * r_edge), r_min, r_edge)
