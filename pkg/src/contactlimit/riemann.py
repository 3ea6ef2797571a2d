"""Euler contact discontinuities and well-prepared smoothed initial data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoff import eta
from .thermo import DomainError, FluidPoint, GasModel, pressure

PRESSURE_MATCH_RTOL = 1e-12


class InadmissibleStateError(ValueError):
    pass


@dataclass(frozen=True)
class ContactWave:
    """Left/right states with common velocity v_bar and pressure p_bar."""

    left: FluidPoint
    right: FluidPoint
    v_bar: float
    p_bar: float

    def admissibility(self, gas: GasModel) -> dict:
        pl = float(pressure(gas, self.left))
        pr = float(pressure(gas, self.right))
        return {
            "velocity_jump": abs(self.left.v - self.right.v),
            "pressure_jump": abs(pl - pr),
            "pressure_tol": PRESSURE_MATCH_RTOL * max(1.0, abs(self.p_bar)),
            "admissible": (self.left.v == self.right.v == self.v_bar
                           and abs(pl - pr) <= PRESSURE_MATCH_RTOL * max(1.0, abs(self.p_bar))),
        }

    @property
    def theta_min(self) -> float:
        return min(self.left.theta, self.right.theta)


def make_contact(gas: GasModel, left: FluidPoint, tau_R: float) -> ContactWave:
    """Contact with the given left state and right specific volume.

    The right temperature is fixed by pressure balance,
    theta_R = (p_bar - p_e(tau_R)) / p_theta(tau_R).
    """
    left.check()
    if not tau_R > 0:
        raise DomainError("tau_R must be positive")
    p_bar = float(pressure(gas, left))
    if tau_R == left.tau:
        return ContactWave(left, left, left.v, p_bar)
    pt = float(gas.p_theta(tau_R))
    if pt == 0.0:
        raise InadmissibleStateError("p_theta(tau_R) = 0: no thermal degree of freedom")
    theta_R = (p_bar - float(gas.p_e(tau_R))) / pt
    if not theta_R > 0:
        raise InadmissibleStateError(f"pressure balance gives theta_R = {theta_R} <= 0")
    return ContactWave(left, FluidPoint(float(tau_R), left.v, theta_R), left.v, p_bar)


def sample_contact(wave: ContactWave, x, t: float = 0.0) -> FluidPoint:
    """Piecewise-constant Euler solution; the left state wins at x = v_bar t."""
    x = np.asarray(x, dtype=float)
    right = x > wave.v_bar * t
    if x.ndim == 0:
        return wave.right if right else wave.left
    pick = lambda a, b: np.where(right, b, a)
    return FluidPoint(pick(wave.left.tau, wave.right.tau),
                      pick(wave.left.v, wave.right.v),
                      pick(wave.left.theta, wave.right.theta))


def lagrangian_reference(wave: ContactWave, x) -> FluidPoint:
    """Reference contact in mass coordinates, where the interface stays at x = 0."""
    return sample_contact(wave, x, 0.0)


@dataclass(frozen=True)
class IsobaricProfile:
    """tau blends between the far states through eta(x/delta); theta keeps p = p_bar."""

    gas: GasModel
    wave: ContactWave
    delta: float

    def __call__(self, x) -> FluidPoint:
        w = self.wave
        x = np.asarray(x, dtype=float)
        tau = w.left.tau + (w.right.tau - w.left.tau) * (1.0 - eta(x / self.delta))
        theta = (w.p_bar - self.gas.p_e(tau)) / self.gas.p_theta(tau)
        theta = np.asarray(theta, dtype=float)
        # exact far states outside the layer
        tau = np.where(x <= -self.delta, w.left.tau, np.where(x >= self.delta, w.right.tau, tau))
        theta = np.where(x <= -self.delta, w.left.theta, np.where(x >= self.delta, w.right.theta, theta))
        if np.any(~(theta > 0)):
            raise InadmissibleStateError("isobaric layer requires theta > 0")
        v = np.full_like(tau, w.v_bar) if tau.ndim else w.v_bar
        return FluidPoint(tau[()] if tau.ndim == 0 else tau, v,
                          theta[()] if theta.ndim == 0 else theta)


def well_prepared_init(gas: GasModel, wave: ContactWave, delta: float) -> IsobaricProfile:
    if not delta > 0:
        raise ValueError("layer width delta must be positive")
    return IsobaricProfile(gas, wave, float(delta))


def default_wave(gas: GasModel | None = None) -> tuple[GasModel, ContactWave]:
    """Ideal gas R = 1, C_v = 1.5, left (1, 0, 1), tau_R = 2."""
    from .thermo import ideal_gas
    gas = gas or ideal_gas(R=1.0, cv=1.5)
    return gas, make_contact(gas, FluidPoint(1.0, 0.0, 1.0), 2.0)
