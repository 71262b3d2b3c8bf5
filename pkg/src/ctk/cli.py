"""Command-line entry point: ctk <group> <command> [options].

Exit codes: 0 success, 1 refused or domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import constants, io, lattice, montecarlo, multiscale, plotdata
from .contour import ContourParams, boundary, build_partition, erase_all, extract_contours, verify_partition
from .model import ModelParams, SpinConfiguration, exact_expectations, hamiltonian, lattice_sum_radial, surface_energy
from .peierls import RegimeError, nu_minus_exact, peierls_beta_c, peierls_constants, truncation_radius


class DomainError(Exception):
    """Refused parameters or inputs; maps to exit code 1."""


MODEL_KEYS = ("d", "alpha", "delta", "J", "h_star", "beta", "tail_tol")


# ------------------------------------------------------------------ helpers


def _add_model_args(ap: argparse.ArgumentParser, **defaults) -> None:
    g = ap.add_argument_group("model")
    g.add_argument("--config", help="TOML or JSON file with model keys (flags override)")
    g.add_argument("--d", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--J", type=float)
    g.add_argument("--h-star", dest="h_star", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--tail-tol", dest="tail_tol", type=float)
    g.add_argument("--epsilon", type=float, default=0.5, help="contour exponent slack (default 0.5)")
    g.add_argument("--M", type=float, help="separation amplitude (default: computed threshold)")
    ap.set_defaults(_model_defaults=defaults)


def _model(args) -> ModelParams:
    base = dict(getattr(args, "_model_defaults", {}) or {})
    if getattr(args, "config", None):
        cfg = io.load_config(args.config)
        base.update(cfg.get("model", cfg))
    for k in MODEL_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    return ModelParams.from_mapping(base)


def _contour_params(args, p: ModelParams) -> ContourParams:
    return ContourParams.from_model(p, args.epsilon, args.M)


def _inputs(args) -> list:
    out = []
    for k in ("config", "region", "spins", "scan"):
        v = getattr(args, k, None)
        if v:
            out.append(v)
    return out


def _argv_without_out(argv: Sequence[str]) -> list:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def _emit(args, params: dict, data) -> None:
    man = io.make_manifest(args.command_name, args.argv_clean, params, _inputs(args))
    io.write_json(getattr(args, "out", None), man, data)


def _parse_range(s: str) -> list:
    """'8:64' (inclusive), '8:64:8', or '1,2,4'."""
    if ":" in s:
        parts = [int(x) for x in s.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [float(x) if "." in x or "e" in x else int(x) for x in s.split(",") if x]


def _region_arg(args) -> frozenset:
    reg = io.read_region(args.region)
    if not reg:
        raise DomainError("empty region")
    return reg


def _finite(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else repr(x)


# ------------------------------------------------------------------ geometry


def cmd_geometry_sphere(args):
    data = {"d": args.d, "n": args.n, "sphere_count": lattice.sphere_count(args.d, args.n), "ball_count": lattice.ball_count(args.d, args.n)}
    _emit(args, {"d": args.d, "n": args.n}, data)


def cmd_geometry_region(args):
    reg = _region_arg(args)
    vol, interior = lattice.volume_and_interior(reg)
    data = {
        "size": len(reg),
        "dimension": lattice.dim_of(reg),
        "diameter": lattice.diameter(reg),
        "components": len(lattice.connected_components(reg)),
        "inner_boundary": len(lattice.inner_boundary(reg)),
        "edge_boundary": len(lattice.edge_boundary(reg)),
        "interior": io.region_to_json(interior),
        "volume_size": len(vol),
    }
    _emit(args, {}, data)


def cmd_geometry_cover(args):
    reg = _region_arg(args)
    cov = lattice.minimal_cover(reg, args.n)
    data = {"scale": args.n, "size": len(cov.cubes), "exact": cov.exact, "cubes": [c.to_json() for c in cov.cubes]}
    _emit(args, {"n": args.n}, data)


def cmd_geometry_volume(args):
    reg = _region_arg(args)
    h = multiscale.cover_hierarchy(reg, args.r)
    _emit(args, {"r": args.r}, {"r": args.r, "sizes": list(h.sizes), "total": h.total, "exact": h.exact})


# ------------------------------------------------------------------ model


def cmd_model_calpha(args):
    p = _model(args)
    est = lattice_sum_radial(p)
    _emit(args, p.to_dict(), {"c_alpha": est.value, "error": est.error, "terms": est.terms})


def cmd_model_surface(args):
    p = _model(args)
    if args.region:
        reg = _region_arg(args)
    else:
        reg = lattice.ball_offsets(p.d, args.ball)
    _emit(args, p.to_dict(), {"size": len(reg), "surface_energy": surface_energy(reg, p)})


def cmd_model_fbr(args):
    p = _model(args)
    radii = [int(R) for R in _parse_range(args.radii)]
    energies = [surface_energy(lattice.ball_offsets(p.d, R), p) for R in radii]
    slope = float(np.polyfit(np.log(radii), np.log(energies), 1)[0]) if len(radii) >= 2 else None
    _emit(args, p.to_dict(), {"R": radii, "F": energies, "loglog_slope": slope})


def cmd_model_energy(args):
    p = _model(args)
    sigma = SpinConfiguration.from_json(json.loads(Path(args.spins).read_text()))
    _emit(args, p.to_dict(), {"hamiltonian": hamiltonian(sigma, p, args.field)})


def cmd_model_exact(args):
    p = _model(args)
    win = SpinConfiguration.box(args.window, p.d).window()
    res = exact_expectations(win, p, args.boundary, args.field)
    data = {"points": res["points"], "mean_spin": res["mean_spin"], "mean_energy": res["mean_energy"], "log_Z": res["log_Z"]}
    _emit(args, {**p.to_dict(), "window": args.window, "boundary": args.boundary}, data)


# ------------------------------------------------------------------ contours


def _spins(args) -> SpinConfiguration:
    return SpinConfiguration.from_json(json.loads(Path(args.spins).read_text()))


def cmd_contours_extract(args):
    p = _model(args)
    cp = _contour_params(args, p)
    sigma = _spins(args)
    cs = extract_contours(sigma, cp)
    _emit(args, {**p.to_dict(), **cp.to_dict()}, {"boundary_size": len(boundary(sigma)), "contours": [g.to_json() for g in cs]})


def cmd_contours_partition(args):
    p = _model(args)
    cp = _contour_params(args, p)
    sigma = _spins(args)
    bd = boundary(sigma)
    P = build_partition(bd, cp, sigma.d)
    ver = verify_partition(P, cp, bd)
    data = {
        "parts": [{"support": io.region_to_json(q.support), "scale": q.scale, "witness": [io.region_to_json(w) for w in q.witness]} for q in P.parts],
        "ok": ver.ok,
        "violations": [{"condition": v.condition, "detail": v.detail} for v in ver.violations],
    }
    _emit(args, {**p.to_dict(), **cp.to_dict()}, data)


def cmd_contours_erase_all(args):
    p = _model(args)
    cp = _contour_params(args, p)
    tau, rounds = erase_all(_spins(args), cp)
    _emit(args, {**p.to_dict(), **cp.to_dict()}, {"rounds": rounds, "all_minus": bool(np.all(tau.values() == -1)), "result": tau.to_json()})


# ------------------------------------------------------------------ entropy


def cmd_entropy_constants(args):
    p = _model(args)
    cp = _contour_params(args, p)
    _emit(args, {**p.to_dict(), **cp.to_dict()}, multiscale.entropy_constants(p.d, cp).to_dict())


def cmd_entropy_enumerate(args):
    p = _model(args)
    cp = _contour_params(args, p)
    ec = multiscale.entropy_constants(p.d, cp)
    found = multiscale.enumerate_contours_C0(args.m, args.box, cp, p.d, m_cap=args.cap)
    logb = ec.c1 * args.m
    bound = math.exp(logb) if logb < 700 else math.inf
    data = {
        "m": args.m,
        "count": len(found),
        "bound_e_c1m": _finite(bound),
        "log_bound": logb,
        "constants": ec.to_dict(),
        "supports": [io.region_to_json(s) for s in found] if args.list else None,
    }
    _emit(args, {**p.to_dict(), **cp.to_dict(), "box_half_width": args.box}, data)


def cmd_entropy_fv(args):
    d, r = args.d, args.r
    n = multiscale.count_FV(args.V, d, r)
    b = constants.entropy_b(d, r)
    _emit(args, {"d": d, "r": r, "V": args.V}, {"V": args.V, "count": n, "bound_e_bV": _finite(math.exp(b * args.V)), "b": b})


# ------------------------------------------------------------------ peierls


def _chain(p: ModelParams, cp: ContourParams) -> dict:
    pc = peierls_constants(p, cp)
    ec = multiscale.entropy_constants(p.d, cp)
    out = {"peierls": pc.to_dict(), "entropy": ec.to_dict()}
    if pc.c2 > 0:
        out["beta_c"] = _finite(peierls_beta_c(ec.c1, pc.c2))
    else:
        out["beta_c"] = None
    return out


def cmd_peierls_constants(args):
    p = _model(args)
    cp = _contour_params(args, p)
    pc = peierls_constants(p, cp)
    data = {"peierls": pc.to_dict(), "regime": constants.regime(p.d, p.alpha, p.delta)}
    if p.h_star > 0:
        try:
            data["truncation"] = truncation_radius(p, pc).to_dict()
        except RegimeError as e:
            data["truncation"] = {"refused": str(e)}
    _emit(args, {**p.to_dict(), **cp.to_dict()}, data)


def cmd_peierls_betac(args):
    p = _model(args)
    cp = _contour_params(args, p)
    ch = _chain(p, cp)
    pc, ec = ch["peierls"], ch["entropy"]
    data = {
        "k_alpha_1": pc["k_alpha_1"],
        "M": cp.M,
        "M_threshold": pc["M_threshold"],
        "c2": pc["c2"],
        "c1": ec["c1"],
        "beta_c": ch["beta_c"],
        "chain": ch,
    }
    _emit(args, {**p.to_dict(), **cp.to_dict()}, data)


def cmd_peierls_truncation(args):
    p = _model(args)
    cp = _contour_params(args, p)
    tr = truncation_radius(p, peierls_constants(p, cp))
    _emit(args, {**p.to_dict(), **cp.to_dict()}, tr.to_dict())


def cmd_peierls_nu(args):
    p = _model(args)
    win = SpinConfiguration.box(args.window, p.d).window()
    res = nu_minus_exact(win, p, args.field)
    data = {"probability": res.probability, "log_Z": res.log_Z, "n_free": res.n_free, "forced": res.forced, "warnings": list(res.warnings)}
    _emit(args, {**p.to_dict(), "window": args.window, "field": args.field}, data)


# ------------------------------------------------------------------ mc


def _mc_template(args) -> tuple:
    cfg = io.load_config(args.config) if args.config else {}
    model = dict(cfg.get("model", {}))
    for k in MODEL_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            model[k] = v
    run_keys = ("L", "boundary", "sweeps", "burn_in", "seed", "measure_every", "field_mode")
    run = {k: cfg[k] for k in run_keys if k in cfg}
    run.update(cfg.get("run", {}))
    for k in ("L", "sweeps", "burn_in", "seed", "boundary"):
        v = getattr(args, f"mc_{k}", None)
        if v is not None:
            run[k] = v
    tmpl = montecarlo.McConfig.from_mapping({**run, "model": model})
    return tmpl, cfg


def _grid(cfg: dict) -> list:
    g = cfg.get("grid", {})
    if "points" in g:
        return list(g["points"])
    axes = [(k, v if isinstance(v, list) else [v]) for k, v in g.items()]
    if not axes:
        return [{}]
    keys = [k for k, _ in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in axes))]


def cmd_mc_run(args):
    tmpl, _ = _mc_template(args)
    if args.strict:
        montecarlo.strict_check(tmpl.p)
    res = montecarlo.run(tmpl)
    data = {**res.summary(), "site_means": res.site_means, "effective_field": res.effective_field}
    _emit(args, tmpl.to_dict(), data)


def cmd_mc_scan(args):
    tmpl, cfg = _mc_template(args)
    grid = _grid(cfg)
    cfgs = montecarlo.grid_configs(tmpl, grid)
    if args.strict:
        for c in cfgs:
            montecarlo.strict_check(c.p)
    rows = montecarlo.scan(tmpl, grid)
    man = io.make_manifest(args.command_name, args.argv_clean, {"template": tmpl.to_dict(), "grid": grid}, _inputs(args))
    out = args.out or "-"
    if out == "-":
        import csv

        sys.stdout.write(io.manifest_line(man) + "\n")
        w = csv.DictWriter(sys.stdout, fieldnames=montecarlo.SCAN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
    else:
        montecarlo.write_csv(rows, out, [io.manifest_line(man)[2:]])


# ------------------------------------------------------------------ plot


def _plot_prefix(args) -> str:
    if not args.out:
        raise DomainError("--out PREFIX is required for plot data")
    return str(Path(args.out).with_suffix(""))


def cmd_plot_phase(args):
    rows = plotdata.read_scan_csv(args.scan)
    man = io.make_manifest(args.command_name, args.argv_clean, {"scan": args.scan}, _inputs(args))
    paths = plotdata.phase_diagram(rows, _plot_prefix(args), man)
    _report(paths)


def cmd_plot_fbr(args):
    p = _model(args)
    radii = [int(R) for R in _parse_range(args.radii)]
    energies = [surface_energy(lattice.ball_offsets(p.d, R), p) for R in radii]
    man = io.make_manifest(args.command_name, args.argv_clean, {**p.to_dict(), "radii": radii}, _inputs(args))
    _report(plotdata.fbr_scaling(radii, energies, _plot_prefix(args), man))


def cmd_plot_nu(args):
    p = _model(args)
    betas = [float(b) for b in str(args.betas).split(",") if b]
    win = SpinConfiguration.box(args.window, p.d).window()
    nus = [nu_minus_exact(win, p.replace(beta=b), args.field).probability for b in betas]
    man = io.make_manifest(args.command_name, args.argv_clean, {**p.to_dict(), "betas": betas, "window": args.window}, _inputs(args))
    _report(plotdata.nu_vs_beta(betas, nus, _plot_prefix(args), man))


def _report(paths) -> None:
    for q in paths:
        print(q)


# ------------------------------------------------------------------ replay


def cmd_replay(args):
    """Re-run the command recorded in an output and compare data sections."""
    src = Path(args.file)
    man = io.read_manifest(src)
    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / src.name
        out_arg = str(target.with_suffix("")) if src.suffix in (".dat", ".gp") else str(target)
        code = main(list(man["argv"]) + ["--out", out_arg], _quiet=True)
        if code != 0:
            raise DomainError(f"replayed command exited with {code}")
        same = io.data_section(src) == io.data_section(target)
    print(json.dumps({"file": str(src), "identical": same}))
    if not same:
        raise DomainError("data section differs from the replayed run")


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctk", description="Contours, total volume and Peierls bounds for long-range Ising models.")
    groups = ap.add_subparsers(dest="group", metavar="GROUP", required=True)

    def sub(group, name, fn, help_, out=True):
        parser = group.add_parser(name, help=help_, description=help_)
        parser.set_defaults(func=fn)
        if out:
            parser.add_argument("--out", help="output path ('-' or omitted: stdout)")
        return parser

    geo = groups.add_parser("geometry", help="lattice geometry").add_subparsers(dest="cmd", metavar="CMD", required=True)
    s = sub(geo, "sphere", cmd_geometry_sphere, "sphere and ball counts")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s = sub(geo, "region", cmd_geometry_region, "summary of a region file")
    s.add_argument("--region", required=True)
    s = sub(geo, "cover", cmd_geometry_cover, "minimal cube cover at one scale")
    s.add_argument("--region", required=True)
    s.add_argument("--n", type=int, required=True)
    s = sub(geo, "volume", cmd_geometry_volume, "total volume over stride-r scales")
    s.add_argument("--region", required=True)
    s.add_argument("--r", type=int, required=True)

    mod = groups.add_parser("model", help="couplings, sums, energies").add_subparsers(dest="cmd", metavar="CMD", required=True)
    s = sub(mod, "c-alpha", cmd_model_calpha, "full lattice coupling sum with error bound")
    _add_model_args(s)
    s = sub(mod, "surface", cmd_model_surface, "surface energy of a region or ball")
    _add_model_args(s)
    s.add_argument("--region")
    s.add_argument("--ball", type=int, default=4)
    s = sub(mod, "fbr", cmd_model_fbr, "surface energy of balls over a radius range")
    _add_model_args(s)
    s.add_argument("--radii", default="8:64:8")
    s = sub(mod, "energy", cmd_model_energy, "Hamiltonian of a configuration file")
    _add_model_args(s)
    s.add_argument("--spins", required=True)
    s.add_argument("--field", default="full")
    s = sub(mod, "exact", cmd_model_exact, "exact expectations on a small box")
    _add_model_args(s)
    s.add_argument("--window", type=int, default=3)
    s.add_argument("--boundary", type=int, choices=(-1, 1), default=-1)
    s.add_argument("--field", default="full")

    con = groups.add_parser("contours", help="boundary partitions and contours").add_subparsers(dest="cmd", metavar="CMD", required=True)
    for name, fn, help_ in (
        ("extract", cmd_contours_extract, "contours of a configuration"),
        ("partition", cmd_contours_partition, "partition of the boundary with verification"),
        ("erase-all", cmd_contours_erase_all, "erase external contours until none remain"),
    ):
        s = sub(con, name, fn, help_)
        _add_model_args(s)
        s.add_argument("--spins", required=True, help="configuration JSON")

    ent = groups.add_parser("entropy", help="total-volume entropy bounds").add_subparsers(dest="cmd", metavar="CMD", required=True)
    s = sub(ent, "constants", cmd_entropy_constants, "a, r, c, b, kappa, c1")
    _add_model_args(s)
    s = sub(ent, "enumerate", cmd_entropy_enumerate, "exhaustive count of origin contours of size m")
    _add_model_args(s)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--box", type=int, default=3, help="half-width w of the [-w, w]^d box (default 3)")
    s.add_argument("--cap", type=int, default=6)
    s.add_argument("--list", action="store_true")
    s = sub(ent, "fv", cmd_entropy_fv, "count origin sets of a given total volume")
    s.add_argument("--V", type=int, required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--r", type=int, default=1)

    pei = groups.add_parser("peierls", help="energy-cost constants and exact probabilities").add_subparsers(dest="cmd", metavar="CMD", required=True)
    s = sub(pei, "constants", cmd_peierls_constants, "energy-cost constants")
    _add_model_args(s)
    s = sub(pei, "betac", cmd_peierls_betac, "full constant chain and the Peierls beta_c")
    _add_model_args(s)
    s = sub(pei, "truncation", cmd_peierls_truncation, "field truncation radius")
    _add_model_args(s)
    s = sub(pei, "nu-exact", cmd_peierls_nu, "nu^-(sigma_0 = +1) by enumeration")
    _add_model_args(s)
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--field", default="full")

    mc = groups.add_parser("mc", help="Metropolis sampling").add_subparsers(dest="cmd", metavar="CMD", required=True)
    for name, fn, help_ in (("run", cmd_mc_run, "single chain"), ("scan", cmd_mc_scan, "grid of chains to CSV")):
        s = sub(mc, name, fn, help_)
        _add_model_args(s)
        s.add_argument("--L", dest="mc_L", type=int)
        s.add_argument("--sweeps", dest="mc_sweeps", type=int)
        s.add_argument("--burn-in", dest="mc_burn_in", type=int)
        s.add_argument("--seed", dest="mc_seed", type=int)
        s.add_argument("--boundary", dest="mc_boundary", type=int, choices=(-1, 1))
        s.add_argument("--strict", action="store_true", help="refuse points outside the transition region")

    pl = groups.add_parser("plot", help="gnuplot-ready data").add_subparsers(dest="cmd", metavar="CMD", required=True)
    s = sub(pl, "phase-diagram", cmd_plot_phase, "grid file from an mc scan CSV")
    s.add_argument("--scan", required=True)
    s = sub(pl, "fbr", cmd_plot_fbr, "log-log surface energy of balls")
    _add_model_args(s)
    s.add_argument("--radii", default="8:64:8")
    s = sub(pl, "nu-vs-beta", cmd_plot_nu, "exact nu over a list of beta")
    _add_model_args(s)
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--betas", default="0.5,1,2")
    s.add_argument("--field", default="full")

    rp = groups.add_parser("replay", help="re-run an output's manifest and compare")
    rp.add_argument("file")
    rp.set_defaults(func=cmd_replay)
    return ap


def main(argv: Sequence[str] | None = None, _quiet: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args.argv = argv
    args.argv_clean = _argv_without_out(argv)
    args.command_name = " ".join(x for x in (args.group, getattr(args, "cmd", None)) if x)
    try:
        args.func(args)
    except (DomainError, ValueError, lattice.GeometryError) as e:
        # model, contour, regime and cap errors all derive from ValueError
        if not _quiet:
            print(f"ctk: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"ctk: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
