"""Plain-text plot data plus gnuplot scripts; nothing is rendered here."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .io import manifest_line

KINDS = ("phase_diagram", "fbr_scaling", "nu_vs_beta")


def _header(manifest: Mapping | None, columns: Sequence[str]) -> str:
    lines = [manifest_line(manifest)] if manifest else []
    lines.append("# " + " ".join(columns))
    return "".join(line + "\n" for line in lines)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_pair(prefix, dat: str, gp: str) -> tuple:
    prefix = Path(prefix)
    dat_path = prefix.with_suffix(".dat")
    gp_path = prefix.with_suffix(".gp")
    dat_path.write_text(dat)
    gp_path.write_text(gp)
    return dat_path, gp_path


def phase_diagram(rows: Sequence[Mapping], prefix, manifest: Mapping | None = None) -> tuple:
    """Grid file of m_abs and m_mean per cell, plus a region-overlay script.

    The x axis is alpha - d when alpha varies across rows and beta otherwise;
    the y axis is always delta. Blocks are separated by blank lines.
    """
    cols = ("alpha_minus_d", "delta", "beta", "h_star", "m_abs", "m_mean", "se_m")
    recs = sorted(
        (float(r["alpha"]) - int(r["d"]), float(r["delta"]), float(r["beta"]), float(r["h_star"]), float(r["m_abs"]), float(r["m_mean"]), float(r["se_m"]))
        for r in rows
    )
    alphas = {r[0] for r in recs}
    x_col = 1 if len(alphas) > 1 else 3
    key = (lambda r: (r[0], r[1])) if x_col == 1 else (lambda r: (r[2], r[1]))
    recs.sort(key=key)
    body = []
    prev = None
    for r in recs:
        x = key(r)[0]
        if prev is not None and x != prev:
            body.append("\n")
        body.append(" ".join(_fmt(v) for v in r) + "\n")
        prev = x
    dat = _header(manifest, cols) + "".join(body)
    name = Path(prefix).with_suffix(".dat").name
    xlabel = "alpha - d" if x_col == 1 else "beta"
    lines = [
        "set terminal pngcairo size 800,600",
        f"set output '{Path(prefix).with_suffix('.png').name}'",
        f"set xlabel '{xlabel}'",
        "set ylabel 'delta'",
        "set cblabel '|m|'",
        "set view map",
        "set key off",
        "set cbrange [0:1]",
    ]
    if x_col == 1:
        lines.append("set xrange [0:*]")
        lines.append("set yrange [0:*]")
        region = "($1 < 1 ? $1 : 1)"
    else:
        amd = next(iter(alphas)) if alphas else 0.5
        region = repr(min(amd, 1.0))
    if recs:
        lines.append(f"splot '{name}' using {x_col}:2:5 with points pointtype 5 pointsize 3 palette, \\")
        lines.append(f"      '+' using 1:({region}):(0) with lines lw 2 lc rgb 'black'")
    else:
        lines.append("set xrange [0:2]")
        lines.append("set yrange [0:2]")
        lines.append(f"plot '+' using 1:({region}) with lines lw 2 lc rgb 'black'")
    gp = _header(manifest, ["gnuplot script"]) + "\n".join(lines) + "\n"
    return _write_pair(prefix, dat, gp)


def fbr_scaling(radii: Sequence[int], energies: Sequence[float], prefix, manifest: Mapping | None = None) -> tuple:
    """Two-column log R, log F_{B_R} data and a straight-line fit script."""
    cols = ("log_R", "log_F")
    body = "".join(f"{_fmt(math.log(R))} {_fmt(math.log(F))}\n" for R, F in zip(radii, energies))
    dat = _header(manifest, cols) + body
    name = Path(prefix).with_suffix(".dat").name
    lines = [
        "set terminal pngcairo size 800,600",
        f"set output '{Path(prefix).with_suffix('.png').name}'",
        "set xlabel 'log R'",
        "set ylabel 'log F(B_R)'",
    ]
    if len(radii) >= 2:
        lines += [
            "f(x) = s * x + c",
            f"fit f(x) '{name}' using 1:2 via s, c",
            "set title sprintf('slope %.3f', s)",
            f"plot '{name}' using 1:2 with points pt 7 title 'data', f(x) with lines title 'fit'",
        ]
    elif radii:
        lines.append(f"plot '{name}' using 1:2 with points pt 7 title 'data'")
    else:
        lines += ["set xrange [0:1]", "plot 0 with lines notitle"]
    gp = _header(manifest, ["gnuplot script"]) + "\n".join(lines) + "\n"
    return _write_pair(prefix, dat, gp)


def nu_vs_beta(betas: Sequence[float], nus: Sequence[float], prefix, manifest: Mapping | None = None) -> tuple:
    cols = ("beta", "nu")
    body = "".join(f"{_fmt(b)} {_fmt(v)}\n" for b, v in zip(betas, nus))
    dat = _header(manifest, cols) + body
    name = Path(prefix).with_suffix(".dat").name
    lines = [
        "set terminal pngcairo size 800,600",
        f"set output '{Path(prefix).with_suffix('.png').name}'",
        "set xlabel 'beta'",
        "set ylabel 'nu(sigma_0 = +1)'",
        "set logscale y",
    ]
    if betas:
        lines.append(f"plot '{name}' using 1:2 with linespoints pt 7 notitle, 0.5 with lines dt 2 notitle")
    else:
        lines += ["set xrange [0:1]", "plot 0.5 with lines dt 2 notitle"]
    gp = _header(manifest, ["gnuplot script"]) + "\n".join(lines) + "\n"
    return _write_pair(prefix, dat, gp)


def read_scan_csv(path) -> list:
    import csv

    with open(path) as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
