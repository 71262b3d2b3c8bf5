"""Surface energy of l1 balls against radius, with slope and log-model fits.

    python scripts/fbr_scaling.py --alpha 2.5 4 3 --out runs/fbr
"""

from __future__ import annotations

import argparse

import numpy as np

from ctk import io, lattice, plotdata
from ctk.model import ModelParams, surface_energy

RADII = tuple(range(8, 65, 4))


def energies(d: int, alpha: float, radii=RADII) -> np.ndarray:
    p = ModelParams(d=d, alpha=alpha)
    return np.array([surface_energy(lattice.ball_offsets(d, R), p) for R in radii])


def fit(d: int, alpha: float, radii=RADII) -> dict:
    """Log-log slope, and relative RMS residuals of two affine models
    F ~ A R^{d-1} + B and F ~ A R^{d-1} log R + B (same parameter count)."""
    R = np.asarray(radii, dtype=float)
    F = energies(d, alpha, radii)
    slope = float(np.polyfit(np.log(R), np.log(F), 1)[0])

    def rms(g):
        A = np.stack([g, np.ones_like(g)], axis=1)
        coef, *_ = np.linalg.lstsq(A, F, rcond=None)
        return float(np.sqrt(np.mean(((A @ coef - F) / F) ** 2)))

    return {
        "slope": slope,
        "resid_pure": rms(R ** (d - 1)),
        "resid_log": rms(R ** (d - 1) * np.log(R)),
        "F": F.tolist(),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--alpha", type=float, nargs="+", default=[2.5, 3.0, 4.0])
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    for alpha in args.alpha:
        res = fit(args.d, alpha)
        print(
            f"alpha={alpha:<4} slope={res['slope']:.4f} "
            f"rms(R^(d-1))={res['resid_pure']:.4f} rms(R^(d-1) log R)={res['resid_log']:.4f}"
        )
        if args.out:
            man = io.make_manifest("scripts/fbr_scaling.py", argv or [], {"d": args.d, "alpha": alpha, "radii": list(RADII)})
            for path in plotdata.fbr_scaling(RADII, res["F"], f"{args.out}_a{alpha:g}", man):
                print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
