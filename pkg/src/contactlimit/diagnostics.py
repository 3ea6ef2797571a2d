"""Relative-entropy functionals, dissipation budgets and identity residuals.

Quadrature is the midpoint rule on the solver grid.  Cell quantities sit at
cell centres; temperature gradients sit on the N+1 edges (cell faces) and
use the far-field ghost cells at the two ends.  Boundary edges carry half
weight.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from .cutoff import eta
from .riemann import ContactWave, lagrangian_reference
from .solver import GridState, RunConfig
from .thermo import GasModel, _density, volume_brackets

CSV_COLUMNS = ["t", "E", "E1", "Dnu", "Dkappa", "entropy_residual", "cancel_residual",
               "e1_slack", "gronwall_slack", "min_tau", "min_theta", "E_over_sqrtkappa"]


def _edge_weights(st: GridState) -> np.ndarray:
    w = np.full(st.N + 1, st.dx)
    w[0] = w[-1] = 0.5 * st.dx
    return w


def _density_vs(gas, st: GridState, ref_tau, ref_v, ref_theta):
    return _density(gas, st.tau, st.v_centers, st.theta, ref_tau, ref_v, ref_theta)


def entropy_functional(gas: GasModel, st: GridState, wave: ContactWave) -> float:
    """E = sum_i -theta_bar s(U_i | U_bar(x_i)) dx against the stationary contact."""
    ref = lagrangian_reference(wave, st.centers)
    return float(np.sum(_density_vs(gas, st, ref.tau, ref.v, ref.theta)) * st.dx)


def cutoff_functional(gas: GasModel, st: GridState, wave: ContactWave, eps: float) -> float:
    """E1: eta(x/eps)-weighted relative entropy against U_L plus eta(-x/eps) against U_R."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = st.centers / eps
    L, R = wave.left, wave.right
    dl = _density_vs(gas, st, L.tau, L.v, L.theta)
    dr = _density_vs(gas, st, R.tau, R.v, R.theta)
    return float(np.sum(eta(x) * dl + eta(-x) * dr) * st.dx)


class _Faces(NamedTuple):
    tau: np.ndarray       # face-averaged tau
    dtheta: np.ndarray    # theta_x
    theta_sq: np.ndarray  # theta_i * theta_{i+1}


def _faces(st: GridState) -> _Faces:
    te, he = st.tau_ext(), st.theta_ext()
    return _Faces(0.5 * (te[:-1] + te[1:]), np.diff(he) / st.dx, he[:-1] * he[1:])


def _cutoff_weight(x, eps, wave):
    return eta(x / eps) * wave.left.theta + eta(-x / eps) * wave.right.theta


def dissipation_terms(st: GridState, wave: ContactWave, eps, kappa, nu) -> dict:
    """Plain and eta-weighted viscous and thermal dissipation rates."""
    vx = np.diff(st.v) / st.dx
    nu_density = nu * vx * vx / (st.tau * st.theta)
    f = _faces(st)
    kappa_density = kappa * f.dtheta ** 2 / (f.tau * f.theta_sq)
    we = _edge_weights(st)
    return {
        "plain_nu": float(np.sum(nu_density) * st.dx),
        "plain_kappa": float(np.sum(kappa_density * we)),
        "weighted_nu": float(np.sum(_cutoff_weight(st.centers, eps, wave) * nu_density) * st.dx),
        "weighted_kappa": float(np.sum(_cutoff_weight(st.edges, eps, wave) * kappa_density * we)),
    }


def dissipation_rate(gas: GasModel, st: GridState, wave: ContactWave, eps, kappa, nu):
    """(weighted rate, (int nu v_x^2/(tau theta), int kappa theta_x^2/(tau theta^2)))."""
    d = dissipation_terms(st, wave, eps, kappa, nu)
    return d["weighted_nu"] + d["weighted_kappa"], (d["plain_nu"], d["plain_kappa"])


def total_entropy(gas: GasModel, st: GridState) -> float:
    return float(np.sum(gas.entropy(st.tau, st.theta)) * st.dx)


def entropy_boundary_flux(st: GridState, kappa) -> float:
    """kappa theta_x / (tau theta) at the right boundary minus the left."""
    f = _faces(st)
    g = kappa * f.dtheta / (f.tau * np.sqrt(f.theta_sq))
    return float(g[-1] - g[0])


def coupling_terms(st: GridState, wave: ContactWave, eps, kappa, C1) -> dict:
    """Heat-flux coupling -int (eta theta_L + eta(-) theta_R) kappa (theta_x/(tau theta))_x
    together with its Cauchy-Schwarz majorant and the 1/tau layer split."""
    f = _faces(st)
    g = f.dtheta / (f.tau * np.sqrt(f.theta_sq))
    w = _cutoff_weight(st.centers, eps, wave)
    direct = -kappa * float(np.sum(w * np.diff(g)))
    # faces where the discrete cutoff varies: the layer
    he = eta(st.centers / eps)
    layer = np.zeros(st.N + 1, dtype=bool)
    layer[1:-1] = np.diff(he) != 0.0
    m = wave.theta_min
    c_lr = 9.0 * (wave.left.theta - wave.right.theta) ** 2 / (16.0 * m)
    kdiss = kappa * f.dtheta ** 2 / (f.tau * f.theta_sq)
    inv = 1.0 / f.tau
    inv_layer = float(np.sum(inv[layer]) * st.dx)
    tail = layer & (inv > C1)
    inv_tail = float(np.sum(inv[tail]) * st.dx)
    kd_layer = float(np.sum(kdiss[layer]) * st.dx)
    return {
        "coupling": direct,
        "coupling_bound": 0.25 * m * kd_layer + c_lr * kappa / eps ** 2 * inv_layer,
        "layer_dissipation": kd_layer,
        "layer_inverse_volume": inv_layer,
        "layer_inverse_tail": inv_tail,
        "layer_width": float(np.count_nonzero(layer) * st.dx),
    }


def cauchy_constant(wave: ContactWave) -> float:
    """9 (theta_L - theta_R)^2 / (16 min(theta_L, theta_R))."""
    return 9.0 * (wave.left.theta - wave.right.theta) ** 2 / (16.0 * wave.theta_min)


class CancellationResult(NamedTuple):
    value: float
    far_field_ok: bool


def _flux_bracket(gas: GasModel, st: GridState, wave: ContactWave, kappa, nu) -> np.ndarray:
    """Edge values of pb (v - vb) - vb nu v_x/tau + vb (p - pb) + kappa theta_x/tau
    + nu v v_x/tau - (p v - pb vb)."""
    pb, vb = wave.p_bar, wave.v_bar
    te, he = st.tau_ext(), st.theta_ext()
    pe = gas.pressure(te, he)
    p = 0.5 * (pe[:-1] + pe[1:])
    vxt = np.concatenate(([0.0], np.diff(st.v) / (st.dx * st.tau), [0.0]))
    vxt = 0.5 * (vxt[:-1] + vxt[1:])
    f = _faces(st)
    v = st.v
    return (pb * (v - vb) - vb * nu * vxt + vb * (p - pb) + kappa * f.dtheta / f.tau
            + nu * v * vxt - (p * v - pb * vb))


def cancellation_residual(gas: GasModel, st: GridState, wave: ContactWave, eps, kappa, nu,
                          shift: float = 0.0, far_field_tol: float = 1e-8) -> CancellationResult:
    """-sum_i (eta(x_i/eps - shift) + eta(-x_i/eps)) (B_{i+1} - B_i).

    With ``shift = 0`` the two cutoffs add to one and the sum reduces to the
    far-field boundary values of B; a nonzero shift is the negative control.
    """
    x = st.centers / eps
    w = eta(x - shift) + eta(-x)
    val = -float(np.sum(w * np.diff(_flux_bracket(gas, st, wave, kappa, nu))))
    k = max(1, st.N // 10)
    L, R = wave.left, wave.right
    ok = (np.max(np.abs(st.tau[:k] - L.tau)) <= far_field_tol * L.tau
          and np.max(np.abs(st.tau[-k:] - R.tau)) <= far_field_tol * R.tau
          and np.max(np.abs(st.theta[:k] - L.theta)) <= far_field_tol * L.theta
          and np.max(np.abs(st.theta[-k:] - R.theta)) <= far_field_tol * R.theta)
    return CancellationResult(val, bool(ok))


def discrete_energy(gas: GasModel, st: GridState) -> tuple[float, float]:
    """(total energy, sum of |energy density| dx)."""
    we = _edge_weights(st)
    e = gas.energy(st.tau, st.theta)
    kin = 0.5 * st.v ** 2 * we
    return float(np.sum(e) * st.dx + np.sum(kin)), float(np.sum(np.abs(e)) * st.dx + np.sum(kin))


def discrete_momentum(st: GridState) -> float:
    return float(np.sum(st.v * _edge_weights(st)))


def discrete_volume(st: GridState) -> float:
    return float(np.sum(st.tau) * st.dx)


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    E1: float
    Dnu: float
    Dkappa: float
    entropy_residual: float
    cancel_residual: float
    e1_slack: float
    gronwall_slack: float
    min_tau: float
    min_theta: float
    E_over_sqrtkappa: float
    # extended audit fields
    plain_nu: float = 0.0
    plain_kappa: float = 0.0
    coupling: float = 0.0
    coupling_bound: float = 0.0
    layer_dissipation: float = 0.0
    layer_inverse_volume: float = 0.0
    layer_inverse_tail: float = 0.0
    layer_measure: float = 0.0
    bracket_integral: float = 0.0
    total_entropy: float = 0.0
    entropy_flux: float = 0.0
    energy: float = 0.0
    energy_drift: float = 0.0
    momentum: float = 0.0
    momentum_drift: float = 0.0
    max_volume_defect: float = 0.0
    min_entropy_step: float = math.inf
    floor_hits: int = 0
    far_field_ok: bool = True
    steps: int = 0

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


def write_records(path, records: Sequence[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([repr(float(x)) for x in r.row()])


def read_records(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def entropy_balance_residual(records: Sequence[DiagnosticsRecord]) -> float:
    """[sum s dx]_{t1}^{t2} - int (plain dissipation) dt - int boundary entropy flux dt
    between the first and last record."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    a, b = records[0], records[-1]
    return ((b.total_entropy - a.total_entropy)
            - (b.plain_nu - a.plain_nu) - (b.plain_kappa - a.plain_kappa)
            - (b.entropy_flux - a.entropy_flux))


class GronwallSlack(NamedTuple):
    t: float
    lhs: float
    rhs: float
    slack: float
    coupling: float
    coupling_bound: float
    coupling_slack: float
    split_bound: float
    e1_slack: float
    tail_ratio: float


def gronwall_monitor(records: Sequence[DiagnosticsRecord], wave: ContactWave, cfg: RunConfig,
                     C1: float = None) -> list:
    """Check 1/2 E + 1/4 min(theta) int int (plain dissipation) <= E1(0) + coupling.

    The coupling is the time-integrated measured heat-flux term.  Alongside,
    the coupling is compared with its Cauchy-Schwarz majorant, and
    ``split_bound`` re-expresses the majorant through the 1/tau <= C1 split.
    """
    if not records or records[0].t != 0.0:
        raise ValueError("record stream must start at t = 0")
    C1 = C1 if C1 is not None else 2.0 / min(wave.left.tau, wave.right.tau)
    e1_0 = records[0].E1
    m = wave.theta_min
    c_lr = cauchy_constant(wave)
    k_e2 = cfg.kappa / cfg.eps ** 2
    out = []
    for r in records:
        lhs = 0.5 * r.E + 0.25 * m * (r.plain_nu + r.plain_kappa)
        rhs = e1_0 + r.coupling
        split = (0.25 * m * r.layer_dissipation
                 + c_lr * k_e2 * (C1 * r.layer_measure + r.layer_inverse_tail))
        ratio = r.layer_inverse_tail / r.bracket_integral if r.bracket_integral > 0 else 0.0
        out.append(GronwallSlack(r.t, lhs, rhs, rhs - lhs, r.coupling, r.coupling_bound,
                                 r.coupling_bound - r.coupling, split, r.e1_slack, ratio))
    return out


class Monitor:
    """Observer for ``solver.run``: accumulates time integrals step by step with
    the trapezoid rule and emits a DiagnosticsRecord at sample times."""

    def __init__(self, gas: GasModel, wave: ContactWave, cfg: RunConfig, C1: float = None):
        self.gas, self.wave, self.cfg = gas, wave, cfg
        self.eps = cfg.eps
        self.C1 = C1 if C1 is not None else 2.0 / min(wave.left.tau, wave.right.tau)
        self.sqrt_kappa = math.sqrt(cfg.kappa)
        self._prev = None
        self._acc = {}

    def _rates(self, st: GridState) -> dict:
        cfg = self.cfg
        r = dissipation_terms(st, self.wave, self.eps, cfg.kappa, cfg.nu)
        r.update(coupling_terms(st, self.wave, self.eps, cfg.kappa, self.C1))
        r["entropy_flux"] = entropy_boundary_flux(st, cfg.kappa)
        ref = lagrangian_reference(self.wave, st.centers)
        r["bracket_integral"] = float(np.sum(volume_brackets(self.gas, st.tau, ref.tau, ref.theta)) * st.dx)
        r["layer_measure"] = r.pop("layer_width")
        return r

    def __call__(self, st: GridState, sample: bool):
        rates = self._rates(st)
        S = total_entropy(self.gas, st)
        V = discrete_volume(st)
        if self._prev is None:
            self._acc = {k: 0.0 for k in rates}
            self.E1_0 = cutoff_functional(self.gas, st, self.wave, self.eps)
            self.S0 = S
            self.energy0, self.energy_scale = discrete_energy(self.gas, st)
            self.momentum0 = discrete_momentum(st)
            mass = st.N * st.dx
            self.momentum_scale = abs(self.momentum0) + mass * math.sqrt(2.0 * self.energy_scale / mass)
            self.max_volume_defect = 0.0
            self.min_entropy_step = math.inf
        else:
            prev, pr = self._prev
            dt = st.t - prev.t
            for k in self._acc:
                self._acc[k] += 0.5 * dt * (pr[k] + rates[k])
            defect = abs(V - self._V - dt * (st.v[-1] - st.v[0])) / abs(self._V)
            self.max_volume_defect = max(self.max_volume_defect, defect)
            self.min_entropy_step = min(self.min_entropy_step, (S - self._S) / st.dx)
        self._prev = (st, rates)
        self._S, self._V = S, V
        if sample:
            return self.record(st, S)
        return None

    def record(self, st: GridState, S: float = None) -> DiagnosticsRecord:
        gas, wave, cfg, a = self.gas, self.wave, self.cfg, self._acc
        S = total_entropy(gas, st) if S is None else S
        E = entropy_functional(gas, st, wave)
        E1 = cutoff_functional(gas, st, wave, self.eps)
        canc = cancellation_residual(gas, st, wave, self.eps, cfg.kappa, cfg.nu)
        energy, _ = discrete_energy(gas, st)
        momentum = discrete_momentum(st)
        m = wave.theta_min
        lhs = 0.5 * E + 0.25 * m * (a["plain_nu"] + a["plain_kappa"])
        resid = (S - self.S0) - a["plain_nu"] - a["plain_kappa"] - a["entropy_flux"]
        return DiagnosticsRecord(
            t=st.t, E=E, E1=E1, Dnu=a["weighted_nu"], Dkappa=a["weighted_kappa"],
            entropy_residual=resid, cancel_residual=canc.value,
            e1_slack=E1 - 0.5 * E, gronwall_slack=self.E1_0 + a["coupling"] - lhs,
            min_tau=float(np.min(st.tau)), min_theta=float(np.min(st.theta)),
            E_over_sqrtkappa=E / self.sqrt_kappa if self.sqrt_kappa > 0 else math.nan,
            plain_nu=a["plain_nu"], plain_kappa=a["plain_kappa"],
            coupling=a["coupling"], coupling_bound=a["coupling_bound"],
            layer_dissipation=a["layer_dissipation"],
            layer_inverse_volume=a["layer_inverse_volume"],
            layer_inverse_tail=a["layer_inverse_tail"], layer_measure=a["layer_measure"],
            bracket_integral=a["bracket_integral"], total_entropy=S,
            entropy_flux=a["entropy_flux"], energy=energy,
            energy_drift=abs(energy - self.energy0) / self.energy_scale,
            momentum=momentum, momentum_drift=abs(momentum - self.momentum0) / self.momentum_scale,
            max_volume_defect=self.max_volume_defect, min_entropy_step=self.min_entropy_step,
            floor_hits=st.floor_hits, far_field_ok=canc.far_field_ok, steps=st.steps,
        )


def record_dict(r: DiagnosticsRecord) -> dict:
    return asdict(r)


RECORD_FIELDS = [f.name for f in fields(DiagnosticsRecord)]
