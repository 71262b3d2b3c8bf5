"""Digit-by-digit comparison of the float constant chains with the mpmath oracle.

    python scripts/constants_audit.py

Prints, per parameter point and constant, the float value, the oracle value
and the number of agreeing significant digits. Exits 1 if any constant
agrees to fewer than 12 digits.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import oracle_constants as oracle  # noqa: E402
from test_constants import float_chain  # noqa: E402

POINTS = [
    dict(d=2, alpha=2.5, delta=1.0, h_star=0.1),
    dict(d=2, alpha=3.0),
    dict(d=2, alpha=4.0, delta=1.5, h_star=0.2),
    dict(d=3, alpha=3.5),
    dict(d=3, alpha=4.5, delta=2.0, h_star=0.3),
]
KEYS = ("a", "r", "c", "b", "kappa", "c1", "k_alpha_1", "M1", "M2", "M_threshold", "c2", "c3", "c4", "R", "beta_c")


def digits(x: float, ref: float) -> float:
    if x == ref:
        return 17.0
    return -math.log10(abs(x - ref) / abs(ref))


def audit(points=POINTS, doubling=2.0) -> list:
    rows = []
    for kw in points:
        thr = float_chain(kw["d"], kw["alpha"])["M_threshold"]
        got = float_chain(**kw, M=doubling * thr)
        ref = oracle.chain(**kw, M=doubling * thr)
        for k in KEYS:
            if k in got:
                rows.append((kw, k, got[k], float(ref[k]), digits(got[k], float(ref[k]))))
    return rows


def main() -> int:
    rows = audit()
    worst = min(r[4] for r in rows)
    for kw, k, v, ref, dig in rows:
        tag = ",".join(f"{a}={b}" for a, b in kw.items())
        print(f"{tag:<34} {k:<12} {v:<24.17g} {ref:<24.17g} {dig:5.1f}")
    print(f"fewest agreeing digits: {worst:.1f}")
    return 0 if worst >= 12 else 1


if __name__ == "__main__":
    raise SystemExit(main())
