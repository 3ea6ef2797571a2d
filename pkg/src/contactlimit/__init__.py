"""Vanishing heat-conductivity limit to an Euler contact discontinuity.

A desk-scale laboratory: Feireisl-type gas models and relative entropies
(``thermo``), contact waves and well-prepared data (``riemann``), a
Lagrangian Navier-Stokes-Fourier solver (``solver``), entropy-functional
diagnostics (``diagnostics``) and kappa sweeps (``harness``).
"""
from .cutoff import eta, eta_prime
from .riemann import ContactWave, make_contact, sample_contact, well_prepared_init
from .solver import GridState, RunConfig, run, stable_dt, step
from .thermo import FluidPoint, GasModel, ideal_elastic, ideal_gas, make_gas, thermal_power

__all__ = [
    "ContactWave", "FluidPoint", "GasModel", "GridState", "RunConfig", "eta", "eta_prime",
    "ideal_elastic", "ideal_gas", "make_contact", "make_gas", "run", "sample_contact",
    "stable_dt", "step", "thermal_power", "well_prepared_init",
]
