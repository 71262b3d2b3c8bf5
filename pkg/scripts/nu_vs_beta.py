"""Exact nu^-(sigma_0 = +1) on a small box over a list of beta.

    python scripts/nu_vs_beta.py --window 5 --betas 0.25 0.5 1 2 --out runs/nu
"""

from __future__ import annotations

import argparse

from ctk import io, plotdata
from ctk.model import ModelParams, SpinConfiguration
from ctk.peierls import nu_minus_exact


def nu_curve(window: int, betas, alpha: float = 3.0, d: int = 2, h_star: float = 0.0) -> list:
    win = SpinConfiguration.box(window, d).window()
    p = ModelParams(d=d, alpha=alpha, h_star=h_star)
    return [nu_minus_exact(win, p.replace(beta=b)).probability for b in betas]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--window", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=3.0)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    nus = nu_curve(args.window, args.betas, args.alpha)
    for b, v in zip(args.betas, nus):
        print(f"beta={b:<5} nu={v!r}")
    if args.out:
        man = io.make_manifest("scripts/nu_vs_beta.py", argv or [], vars(args))
        for path in plotdata.nu_vs_beta(args.betas, nus, args.out, man):
            print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
