"""E(T) at fixed kappa across viscosities; heat conduction should dominate."""
import argparse
import os
import sys

from contactlimit.harness import SweepPlan, sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, default=1e-3)
    ap.add_argument("--nus", type=float, nargs="+", default=[0.0, 1e-4, 1e-3, 1e-2])
    ap.add_argument("--T", type=float, default=0.2)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/nu_uniformity.csv")
    args = ap.parse_args(argv)

    rep = sweep(SweepPlan(kappas=(args.kappa,), nus=tuple(args.nus), T=args.T, workers=args.workers))
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    rep.to_csv(args.out)
    for r in rep.rows:
        print(f"nu={r.nu:<8g} E(T)={r.ET:.6e}  Dnu={r.Dnu:.3e}  Dkappa={r.Dkappa:.3e} {r.flag}")
    ets = [r.ET for r in rep.rows if not r.flag]
    print(f"max/min E(T) = {max(ets) / min(ets):.4f}")
    return 1 if rep.flagged else 0


if __name__ == "__main__":
    sys.exit(main())
