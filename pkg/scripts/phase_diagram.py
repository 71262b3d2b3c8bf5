"""Phase-diagram scan over (beta, delta) at fixed alpha, with plot data.

    python scripts/phase_diagram.py --out runs/phase

writes runs/phase.csv, runs/phase.dat and runs/phase.gp. CTK_THREADS caps
the worker count.
"""

from __future__ import annotations

import argparse
import itertools
import time
from pathlib import Path

from ctk import io, montecarlo, plotdata
from ctk.model import ModelParams

BETAS = (0.05, 0.1, 0.15, 0.2, 0.3, 0.5)
DELTAS = (0.1, 0.3, 0.5, 0.7, 0.9, 1.2)


def template(L=32, sweeps=2000, burn_in=500, seed=2024, h_star=6.0, alpha=2.5) -> montecarlo.McConfig:
    p = ModelParams(d=2, alpha=alpha, h_star=h_star)
    return montecarlo.McConfig(L=L, p=p, boundary=-1, sweeps=sweeps, burn_in=burn_in, seed=seed)


def grid(betas=BETAS, deltas=DELTAS) -> list:
    return [{"beta": b, "delta": de} for b, de in itertools.product(betas, deltas)]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="phase")
    ap.add_argument("--L", type=int, default=32)
    ap.add_argument("--sweeps", type=int, default=2000)
    ap.add_argument("--burn-in", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--h-star", type=float, default=6.0)
    args = ap.parse_args(argv)

    tmpl = template(args.L, args.sweeps, args.burn_in, args.seed, args.h_star)
    g = grid()
    t0 = time.perf_counter()
    rows = montecarlo.scan(tmpl, g)
    elapsed = time.perf_counter() - t0
    man = io.make_manifest("scripts/phase_diagram.py", argv or [], {"template": tmpl.to_dict(), "grid": g})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    montecarlo.write_csv(rows, out.with_suffix(".csv"), [io.manifest_line(man)[2:]])
    for path in plotdata.phase_diagram(rows, out, man):
        print(path)
    for r in rows:
        print(f"beta={r['beta']:<5} delta={r['delta']:<4} m={r['m_mean']:+.4f} se={r['se_m']:.4f}")
    print(f"{len(rows)} points in {elapsed:.1f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
