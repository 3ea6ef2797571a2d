"""Command line: simulate, sweep, riemann, check."""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import warnings

import numpy as np

from .diagnostics import Monitor, gronwall_monitor, write_records
from .harness import (SUITES, SweepPlan, check, format_check, gas_from_options, sweep,
                      write_case_records)
from .riemann import InadmissibleStateError, make_contact, well_prepared_init
from .solver import NumericalFailure, RunConfig, run, write_snapshot
from .thermo import FluidPoint


def read_config(path) -> dict:
    """Flat key = value file; '#' starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=",))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_string("[run]\n" + fh.read())
    return dict(parser["run"])


def _floats(text) -> tuple:
    return tuple(float(x) for x in str(text).replace(";", ",").split(",") if x.strip())


# key -> (type, default); file values are converted with the same type as flags
SIM_KEYS = {
    "kappa": (float, 1e-3), "nu": (float, 0.0), "gas": (str, "ideal"), "gamma": (float, None),
    "R": (float, None), "A": (float, None), "B": (float, None), "cv": (float, None),
    "N": (int, None), "L": (float, 1.0), "T": (float, 0.2), "delta": (float, None),
    "cfl": (float, 0.4), "samples": (str, "51"),
    "tau_left": (float, 1.0), "v_left": (float, 0.0), "theta_left": (float, 1.0),
    "tau_right": (float, 2.0),
}
SWEEP_KEYS = {
    "kappas": (_floats, SweepPlan.kappas), "nus": (_floats, SweepPlan.nus),
    "workers": (int, 1), "N_min": (int, 2000), "resolution": (float, 80.0),
    "delta_factor": (float, 1.0), "n_samples": (int, 51),
}


def _merge(args, keys: dict) -> dict:
    file_vals = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_vals) - set(keys)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for k, (conv, default) in keys.items():
        flag = getattr(args, k, None)
        if flag is not None:
            out[k] = flag
        elif k in file_vals:
            out[k] = conv(file_vals[k])
        else:
            out[k] = default
    return out


def _gas(opts: dict):
    return gas_from_options(opts["gas"], **{k: opts.get(k) for k in ("R", "A", "B", "cv", "gamma")})


def _sample_times(spec: str, T: float) -> tuple:
    spec = str(spec)
    if "," in spec:
        return _floats(spec)
    n = int(spec)
    if n < 2:
        raise ValueError("--samples needs at least 2 times")
    return tuple(np.linspace(0.0, T, n))


def _add_gas_flags(p):
    p.add_argument("--gas", choices=["ideal", "ideal_elastic", "thermal_power"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--cv", type=float)
    p.add_argument("--tau-left", dest="tau_left", type=float)
    p.add_argument("--v-left", dest="v_left", type=float)
    p.add_argument("--theta-left", dest="theta_left", type=float)
    p.add_argument("--tau-right", dest="tau_right", type=float)


def cmd_simulate(args) -> int:
    o = _merge(args, SIM_KEYS)
    gas = _gas(o)
    wave = make_contact(gas, FluidPoint(o["tau_left"], o["v_left"], o["theta_left"]), o["tau_right"])
    kappa = o["kappa"]
    N = o["N"]
    if N is None:
        N = max(2000, math.ceil(80 * o["L"] / math.sqrt(kappa))) if kappa > 0 else 2000
        N += N % 2
    cfg = RunConfig(kappa=kappa, nu=o["nu"], L=o["L"], N=N, T=o["T"], delta=o["delta"],
                    cfl=o["cfl"], sample_times=_sample_times(o["samples"], o["T"]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            out = run(gas, cfg, well_prepared_init(gas, wave, cfg.delta), Monitor(gas, wave, cfg))
        except NumericalFailure as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    recs = [r for _, r in out]
    st = out[-1][0]
    write_snapshot(args.out, st)
    diag = args.diagnostics or os.path.splitext(args.out)[0] + "_diagnostics.csv"
    write_records(diag, recs)
    slack = min(s.slack for s in gronwall_monitor(recs, wave, cfg))
    last = recs[-1]
    print(f"N={cfg.N} steps={st.steps} t={st.t!r}")
    print(f"E={last.E!r} E_over_sqrtkappa={last.E_over_sqrtkappa!r}")
    print(f"min_e1_slack={min(r.e1_slack for r in recs)!r} min_gronwall_slack={slack!r}")
    print(f"snapshot={args.out} diagnostics={diag}")
    if last.floor_hits:
        print(f"flagged: positivity floor triggered {last.floor_hits} times", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    o = _merge(args, {**SIM_KEYS, **SWEEP_KEYS})
    params = {k: o[k] for k in ("R", "A", "B", "cv", "gamma") if o[k] is not None}
    if o["gas"] == "ideal":
        params = {"R": 1.0, "cv": 1.5, **params}
    plan = SweepPlan(kappas=o["kappas"], nus=o["nus"], gas=o["gas"], gas_params=params,
                     left=(o["tau_left"], o["v_left"], o["theta_left"]), tau_R=o["tau_right"],
                     L=o["L"], T=o["T"], cfl=o["cfl"], n_samples=o["n_samples"],
                     delta_factor=o["delta_factor"], N_min=o["N_min"],
                     resolution=o["resolution"], workers=o["workers"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report, results = sweep(plan, return_records=True)
    report.to_csv(args.out)
    if args.plot_data:
        report.write_plot_data(args.plot_data)
    if args.diagnostics_dir:
        write_case_records(args.diagnostics_dir, results)
    for k, v in report.summary().items():
        print(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}")
    for r in report.flagged:
        print(f"flagged: nu={r.nu!r} kappa={r.kappa!r}: {r.flag}", file=sys.stderr)
    return 1 if report.flagged else 0


def cmd_riemann(args) -> int:
    o = _merge(args, SIM_KEYS)
    gas = _gas(o)
    try:
        wave = make_contact(gas, FluidPoint(o["tau_left"], o["v_left"], o["theta_left"]),
                            o["tau_right"])
    except InadmissibleStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    adm = wave.admissibility(gas)
    for side, s in (("L", wave.left), ("R", wave.right)):
        print(f"tau_{side}={s.tau!r}")
        print(f"v_{side}={s.v!r}")
        print(f"theta_{side}={s.theta!r}")
    print(f"v_bar={wave.v_bar!r}")
    print(f"p_bar={wave.p_bar!r}")
    for k, v in adm.items():
        text = str(v).lower() if isinstance(v, bool) else repr(v)
        print(f"{k}={text}")
    return 0 if all(v for v in adm.values() if isinstance(v, bool)) else 1


def cmd_check(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lines = check(args.suite, fast=args.fast)
    print(format_check(lines))
    return 0 if all(l.passed for l in lines) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contactlimit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one well-prepared contact problem")
    p.add_argument("--config")
    p.add_argument("--kappa", type=float)
    p.add_argument("--nu", type=float)
    _add_gas_flags(p)
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--samples", help="count of equally spaced times, or a comma list")
    p.add_argument("--out", required=True, help="snapshot CSV at the final time")
    p.add_argument("--diagnostics", help="diagnostics CSV (default: <out>_diagnostics.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="kappa x nu sweep with rate fit")
    p.add_argument("--config")
    p.add_argument("--kappas", type=_floats)
    p.add_argument("--nus", type=_floats)
    _add_gas_flags(p)
    p.add_argument("--L", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--plot-data", dest="plot_data")
    p.add_argument("--diagnostics-dir", dest="diagnostics_dir")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("riemann", help="print the contact discontinuity for given states")
    p.add_argument("--config")
    _add_gas_flags(p)
    p.set_defaults(func=cmd_riemann)

    p = sub.add_parser("check", help="run a named verification suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
