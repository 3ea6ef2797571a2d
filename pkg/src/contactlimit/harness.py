"""kappa sweeps, log-log rate fits and the named check suites."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import cutoff
from .diagnostics import (Monitor, cancellation_residual, entropy_balance_residual,
                          gronwall_monitor, write_records)
from .riemann import ContactWave, make_contact, well_prepared_init
from .solver import GridState, NumericalFailure, RunConfig, run
from .thermo import FluidPoint, GasModel, make_gas


GAS_PARAMS = {
    "ideal": ("R", "cv"),
    "ideal_elastic": ("R", "A", "gamma", "cv"),
    "thermal_power": ("B", "gamma", "cv"),
}


def gas_from_options(name: str, **opts) -> GasModel:
    """Catalog gas from loose options; keys the model does not take are ignored."""
    allowed = GAS_PARAMS.get(name)
    if allowed is None:
        raise ValueError(f"unknown gas model {name!r}; choose from {sorted(GAS_PARAMS)}")
    return make_gas(name, **{k: float(v) for k, v in opts.items() if k in allowed and v is not None})


@dataclass
class SweepPlan:
    kappas: tuple = tuple(10.0 ** -np.arange(2.0, 4.01, 0.5))
    nus: tuple = (0.0, 1e-3)
    gas: str = "ideal"
    gas_params: dict = field(default_factory=lambda: {"R": 1.0, "cv": 1.5})
    left: tuple = (1.0, 0.0, 1.0)
    tau_R: float = 2.0
    L: float = 1.0
    T: float = 0.2
    cfl: float = 0.4
    n_samples: int = 51
    delta_factor: float = 1.0
    N_min: int = 2000
    resolution: float = 80.0
    N_max: int = 200_000
    workers: int = 1
    repetitions: int = 1

    def __post_init__(self):
        ks = [float(k) for k in self.kappas]
        if any(k <= 0 for k in ks) or len(set(ks)) != len(ks):
            raise ValueError("kappa values must be positive and distinct")
        self.kappas = tuple(sorted(ks, reverse=True))
        self.nus = tuple(float(n) for n in self.nus)
        for k in self.kappas:
            delta = self.delta_factor * math.sqrt(k)
            if 2 * self.L / self.grid_size(k) > delta / 8 * (1 + 1e-12):
                raise ValueError(f"resolution rule leaves dx > delta/8 at kappa = {k:g}")

    def grid_size(self, kappa: float) -> int:
        n = max(self.N_min, math.ceil(self.resolution * self.L / math.sqrt(kappa)))
        n += n % 2
        if n > self.N_max:
            raise ValueError(f"N = {n} exceeds the memory guard N_max = {self.N_max}")
        return n

    def build_gas(self) -> GasModel:
        return gas_from_options(self.gas, **self.gas_params)

    def build_wave(self, gas: GasModel) -> ContactWave:
        return make_contact(gas, FluidPoint(*self.left), self.tau_R)

    def run_config(self, kappa: float, nu: float) -> RunConfig:
        delta = self.delta_factor * math.sqrt(kappa)
        return RunConfig(kappa=kappa, nu=nu, L=self.L, N=self.grid_size(kappa), T=self.T,
                         delta=delta, eps=delta, cfl=self.cfl, n_samples=self.n_samples)


@dataclass
class RunRow:
    kappa: float
    nu: float
    N: int
    E0: float = math.nan
    ET: float = math.nan
    ET_over_sqrtkappa: float = math.nan
    Dnu: float = math.nan
    Dkappa: float = math.nan
    min_e1_slack: float = math.nan
    min_gronwall_slack: float = math.nan
    min_coupling_slack: float = math.nan
    energy_drift: float = math.nan
    momentum_drift: float = math.nan
    volume_defect: float = math.nan
    entropy_residual: float = math.nan
    floor_hits: int = 0
    flag: str = ""

    COLUMNS = ("nu", "kappa", "N", "E0", "ET", "ET_over_sqrtkappa", "Dnu", "Dkappa",
               "min_e1_slack", "min_gronwall_slack", "min_coupling_slack", "energy_drift",
               "momentum_drift", "volume_defect", "entropy_residual", "floor_hits", "flag")

    def csv_fields(self) -> list:
        out = []
        for c in self.COLUMNS:
            x = getattr(self, c)
            out.append(repr(float(x)) if isinstance(x, float) else str(x))
        return out


class FitResult(NamedTuple):
    slope: float
    intercept: float
    residual: float


def fit_rate(pairs: Sequence[tuple]) -> FitResult:
    """Least squares of log E_T against log kappa."""
    if len(pairs) < 3:
        raise ValueError("need at least three (kappa, E_T) pairs")
    k, e = np.array(pairs, dtype=float).T
    if np.any(~(k > 0)) or np.any(~(e > 0)):
        raise ValueError("kappa and E_T must be positive")
    A = np.column_stack([np.log(k), np.ones_like(k)])
    y = np.log(e)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return FitResult(float(coef[0]), float(coef[1]), float(np.linalg.norm(A @ coef - y)))


@dataclass
class RateReport:
    rows: list
    fits: dict            # nu -> FitResult
    pooled: Optional[FitResult]
    ratio: float          # max/min of E_T / sqrt(kappa) over unflagged rows

    @property
    def flagged(self) -> list:
        return [r for r in self.rows if r.flag]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(RunRow.COLUMNS) + "\n")
            for r in self.rows:
                fh.write(",".join(r.csv_fields()) + "\n")

    def write_plot_data(self, path) -> None:
        with open(path, "w") as fh:
            for nu in sorted({r.nu for r in self.rows}):
                fh.write(f"# nu={nu!r}: log_kappa log_ET\n")
                for r in self.rows:
                    if r.nu == nu and r.ET > 0:
                        fh.write(f"{math.log(r.kappa)!r} {math.log(r.ET)!r}\n")
                fh.write("\n")

    def summary(self) -> dict:
        out = {"rows": len(self.rows), "flagged": len(self.flagged), "ratio_max_min": self.ratio}
        for nu, f in sorted(self.fits.items()):
            out[f"slope_nu={nu:g}"] = f.slope
        if self.pooled is not None:
            out["slope_pooled"] = self.pooled.slope
        return out


@dataclass
class CaseResult:
    row: RunRow
    records: list
    final: Optional[GridState] = None


def run_case(plan: SweepPlan, kappa: float, nu: float, keep_state: bool = False) -> CaseResult:
    gas = plan.build_gas()
    wave = plan.build_wave(gas)
    cfg = plan.run_config(kappa, nu)
    row = RunRow(kappa=kappa, nu=nu, N=cfg.N)
    try:
        out = run(gas, cfg, well_prepared_init(gas, wave, cfg.delta), Monitor(gas, wave, cfg))
    except (NumericalFailure, ValueError) as exc:
        row.flag = f"failed: {exc}"
        return CaseResult(row, [])
    recs = [r for _, r in out]
    slacks = gronwall_monitor(recs, wave, cfg)
    first, last = recs[0], recs[-1]
    row.E0, row.ET = first.E, last.E
    row.ET_over_sqrtkappa = last.E_over_sqrtkappa
    row.Dnu, row.Dkappa = last.Dnu, last.Dkappa
    row.min_e1_slack = min(r.e1_slack for r in recs)
    row.min_gronwall_slack = min(s.slack for s in slacks)
    row.min_coupling_slack = min(s.coupling_slack for s in slacks)
    row.energy_drift = max(r.energy_drift for r in recs)
    row.momentum_drift = max(r.momentum_drift for r in recs)
    row.volume_defect = last.max_volume_defect
    row.entropy_residual = entropy_balance_residual(recs)
    row.floor_hits = last.floor_hits
    if last.floor_hits:
        row.flag = f"positivity floor triggered {last.floor_hits} times"
    return CaseResult(row, recs, out[-1][0] if keep_state else None)


def _case_job(args):
    plan, kappa, nu = args
    return run_case(plan, kappa, nu)


def sweep(plan: SweepPlan, return_records: bool = False):
    """Run every (kappa, nu) case and build the RateReport.

    Cases are independent; with ``plan.workers > 1`` they run in a process
    pool.  Output order is fixed by sorting, so the report does not depend on
    scheduling.
    """
    jobs = [(plan, k, n) for n in plan.nus for k in plan.kappas]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            results = list(pool.map(_case_job, jobs))
    else:
        results = [_case_job(j) for j in jobs]
    results.sort(key=lambda c: (c.row.nu, -c.row.kappa))
    report = build_report([c.row for c in results])
    return (report, results) if return_records else report


def build_report(rows: list) -> RateReport:
    rows = sorted(rows, key=lambda r: (r.nu, -r.kappa))
    good = [r for r in rows if not r.flag and r.ET > 0]
    fits = {}
    for nu in sorted({r.nu for r in good}):
        pairs = [(r.kappa, r.ET) for r in good if r.nu == nu]
        if len(pairs) >= 3:
            fits[nu] = fit_rate(pairs)
    pooled = fit_rate([(r.kappa, r.ET) for r in good]) if len(good) >= 3 else None
    vals = [r.ET_over_sqrtkappa for r in good]
    ratio = max(vals) / min(vals) if vals else math.nan
    return RateReport(rows, fits, pooled, ratio)


# ----------------------------------------------------------------------------
# check suites

class CheckLine(NamedTuple):
    name: str
    passed: bool
    measured: str


def _line(name, ok, **measured) -> CheckLine:
    return CheckLine(name, bool(ok), " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                                               for k, v in measured.items()))


def _check_eta(fast):
    e, ep = cutoff.eta, cutoff.eta_prime
    yield _line("eta values", e(-1.0) == 1.0 and e(0.0) == 0.5 and e(1.0) == 0.0,
                eta_m1=float(e(-1.0)), eta_0=float(e(0.0)), eta_1=float(e(1.0)))
    yield _line("eta' values", ep(0.0) == -0.75 and ep(1.0) == 0.0 and ep(-1.0) == 0.0,
                d0=float(ep(0.0)), d1=float(ep(1.0)), dm1=float(ep(-1.0)))
    x = np.random.default_rng(1).uniform(-2, 2, 1000)
    asym = float(np.max(np.abs(ep(x) - ep(-x))))
    yield _line("eta' even", asym <= 1e-15, max_asymmetry=asym)


def _check_thermo(fast):
    from .thermo import ideal_elastic, ideal_gas, relative_entropy_density, tail_ratio_bound
    rng = np.random.default_rng(2)
    n = 2000 if fast else 10_000
    for gas in (ideal_gas(), ideal_elastic(gamma=2.0)):
        pt = FluidPoint(rng.uniform(0.05, 10, n), rng.normal(0, 2, n), rng.uniform(0.05, 10, n))
        ref = FluidPoint(rng.uniform(0.05, 10, n), rng.normal(0, 2, n), rng.uniform(0.05, 10, n))
        d = relative_entropy_density(gas, pt, ref)
        yield _line(f"relative entropy >= 0 ({gas.name})", np.min(d) >= 0, min_density=float(np.min(d)))
    ref = FluidPoint(1.0, 0.0, 1.0)
    b = tail_ratio_bound(ideal_elastic(gamma=2.0), ref, 10.0, 1e-6)
    yield _line("tail ratio finite (gamma=2)", np.isfinite(b.sup) and not b.diverges, sup=b.sup)
    b = tail_ratio_bound(ideal_gas(R=1.0), ref, 10.0, 1e-6)
    yield _line("tail ratio diverges (ideal)", b.diverges, ratio_at_min=b.ratio_at_min)


def _contact_run(kappa, nu, N, T, cfl=0.4, n_samples=21, gas=None):
    from .riemann import default_wave
    gas, wave = default_wave(gas)
    cfg = RunConfig(kappa=kappa, nu=nu, N=N, T=T, cfl=cfl, n_samples=n_samples)
    out = run(gas, cfg, well_prepared_init(gas, wave, cfg.delta), Monitor(gas, wave, cfg))
    return gas, wave, cfg, out


def _check_conservation(fast):
    from .riemann import default_wave
    gas, wave = default_wave()
    cfg = RunConfig(kappa=1e-3, nu=1e-3, N=64, T=0.05, delta=0.5)
    flat = lambda x: FluidPoint(np.ones_like(x), np.zeros_like(x), np.ones_like(x))
    out = run(gas, cfg, flat, Monitor(gas, make_contact(gas, FluidPoint(1.0, 0.0, 1.0), 1.0), cfg))
    r = out[-1][1]
    yield _line("constant state: zero drift", r.energy_drift == 0 and r.momentum_drift == 0,
                energy_drift=r.energy_drift, momentum_drift=r.momentum_drift)
    N = 800 if fast else 2530
    _, _, _, out = _contact_run(1e-3, 1e-3, N, 0.2 if not fast else 0.05)
    recs = [r for _, r in out]
    ed = max(r.energy_drift for r in recs)
    md = max(r.momentum_drift for r in recs)
    vd = recs[-1].max_volume_defect
    yield _line("contact run: energy/momentum drift <= 1e-6", ed <= 1e-6 and md <= 1e-6,
                energy_drift=ed, momentum_drift=md)
    yield _line("contact run: volume identity <= 1e-12 per step", vd <= 1e-12, volume_defect=vd)


def _check_cutoff(fast):
    _, _, _, out = _contact_run(1e-3, 0.0, 800 if fast else 2530, 0.05 if fast else 0.2)
    recs = [r for _, r in out]
    worst = min(r.e1_slack + 1e-10 * max(1.0, r.E) for r in recs)
    yield _line("E1 >= E/2 at all samples", worst >= 0, min_slack=min(r.e1_slack for r in recs))


def _check_cancellation(fast):
    Ns = (800, 1600, 3200) if fast else (2530, 5060, 10120)
    T = 0.05 if fast else 0.2
    Cs, last = [], None
    for N in Ns:
        gas, wave, cfg, out = _contact_run(1e-3, 0.0, N, T, n_samples=2)
        st = out[-1][0]
        r = abs(cancellation_residual(gas, wave=wave, st=st, eps=cfg.eps, kappa=cfg.kappa, nu=cfg.nu).value)
        Cs.append(r / st.dx ** 2)
        last = (gas, wave, cfg, st, r)
    gas, wave, cfg, st, r = last
    control = abs(cancellation_residual(gas, st, wave, cfg.eps, cfg.kappa, cfg.nu, shift=0.3).value)
    yield _line("cancellation residual <= C dx^2 (C = 1)", max(Cs) <= CANCELLATION_C,
                C_coarse=Cs[0], C_mid=Cs[1], C_fine=Cs[2])
    yield _line("asymmetric control >= 100x residual", control >= 100 * r, control=control, residual=r)


def _check_entropy(fast):
    N = 800 if fast else 2530
    T = 0.05 if fast else 0.2
    res = []
    steps_ok = True
    for n, cfl in ((N, 0.4), (2 * N, 0.2)):
        _, _, _, out = _contact_run(1e-3, 0.0, n, T, cfl=cfl)
        recs = [r for _, r in out]
        res.append(abs(entropy_balance_residual(recs)))
        steps_ok &= recs[-1].min_entropy_step >= -1e-10
    yield _line("entropy residual shrinks >= 3x", res[0] >= 3 * res[1],
                coarse=res[0], fine=res[1], factor=res[0] / res[1] if res[1] else math.inf)
    yield _line("sum s dx non-decreasing per step", steps_ok)


def _check_gronwall(fast):
    gas, wave, cfg, out = _contact_run(1e-3, 1e-3, 800 if fast else 2530, 0.05 if fast else 0.2)
    sl = gronwall_monitor([r for _, r in out], wave, cfg)
    yield _line("1/2 E + 1/4 min(theta) D <= E1(0) + coupling", min(s.slack for s in sl) >= -1e-8,
                min_slack=min(s.slack for s in sl))
    yield _line("coupling <= Cauchy majorant", min(s.coupling_slack for s in sl) >= -1e-12,
                min_slack=min(s.coupling_slack for s in sl))


def _check_rate(fast):
    if fast:
        plan = SweepPlan(kappas=(1e-2, 10 ** -2.5, 1e-3), nus=(0.0,), N_min=200, resolution=16.0,
                         n_samples=11)
    else:
        plan = SweepPlan()
    rep = sweep(plan)
    slopes = [f.slope for f in rep.fits.values()]
    ok_slope = all(0.35 <= s <= 0.7 for s in slopes) if fast else all(s >= 0.35 for s in slopes)
    yield _line("fitted slope", ok_slope and not rep.flagged,
                **{f"slope_nu={nu:g}": f.slope for nu, f in rep.fits.items()})
    yield _line("max/min E_T/sqrt(kappa) <= 5", rep.ratio <= 5, ratio=rep.ratio)


CANCELLATION_C = 1.0

SUITES = {
    "eta": _check_eta,
    "thermo": _check_thermo,
    "conservation": _check_conservation,
    "cutoff": _check_cutoff,
    "cancellation": _check_cancellation,
    "entropy": _check_entropy,
    "gronwall": _check_gronwall,
    "rate": _check_rate,
}


def check(suite: str, fast: bool = False) -> list:
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
    lines = []
    for name in names:
        lines.extend(SUITES[name](fast))
    return lines


def format_check(lines) -> str:
    return "\n".join(f"{'PASS' if l.passed else 'FAIL'} {l.name} {l.measured}".rstrip() for l in lines)


def write_case_records(directory, results) -> None:
    os.makedirs(directory, exist_ok=True)
    for c in results:
        if c.records:
            write_records(os.path.join(directory, f"diag_nu{c.row.nu:g}_kappa{c.row.kappa:.6g}.csv"),
                          c.records)
