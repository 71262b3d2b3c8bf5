"""Seeded single-spin-flip Metropolis sampler on an L^d window.

The exterior is folded into a per-site effective field, so the chain samples
the finite-volume Gibbs measure exactly (no halo, no cutoff). Couplings are
looked up in an offset table of size (2L-1)^d; local fields are updated in
O(N) after each accepted flip.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

from . import constants
from .model import FieldMode, ModelParams, _kernel_on_offsets, exterior_terms, field_array


@dataclass(frozen=True)
class McConfig:
    L: int = 16
    p: ModelParams = field(default_factory=ModelParams)
    boundary: int = -1
    sweeps: int = 2000
    burn_in: int = 500
    seed: int = 12345
    measure_every: int = 1
    field_mode: str = "full"
    keep_trace: bool = False

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if not self.sweeps > self.burn_in >= 0:
            raise ValueError("need sweeps > burn_in >= 0")
        if self.boundary not in (-1, 1):
            raise ValueError("boundary must be +1 or -1")
        if self.measure_every < 1:
            raise ValueError("measure_every must be >= 1")
        FieldMode.parse(self.field_mode)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p"] = self.p.to_dict()
        return out

    @classmethod
    def from_mapping(cls, m: Mapping) -> "McConfig":
        kw = {k: m[k] for k in ("L", "boundary", "sweeps", "burn_in", "seed", "measure_every", "field_mode", "keep_trace") if k in m}
        pm = m.get("p", m.get("model", {k: m[k] for k in ModelParams.__dataclass_fields__ if k in m}))
        return cls(p=ModelParams.from_mapping(pm), **kw)


@dataclass
class McResult:
    magnetization_mean: float
    magnetization_abs_mean: float
    susceptibility_proxy: float
    energy_mean: float
    se_m: float
    se_E: float
    sigma0_mean: float
    sigma0_se: float
    acceptance: float
    n_measurements: int
    site_means: np.ndarray
    effective_field: np.ndarray
    trace: np.ndarray | None = None
    final_spins: np.ndarray | None = None

    def summary(self) -> dict:
        keys = (
            "magnetization_mean",
            "magnetization_abs_mean",
            "susceptibility_proxy",
            "energy_mean",
            "se_m",
            "se_E",
            "sigma0_mean",
            "sigma0_se",
            "acceptance",
            "n_measurements",
        )
        return {k: getattr(self, k) for k in keys}


# --------------------------------------------------------------- geometry


def window_points(L: int, d: int) -> np.ndarray:
    """Sorted points of the centred L^d box, matching SpinConfiguration.box."""
    off = -(L // 2)
    axes = [np.arange(off, off + L)] * d
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)


def effective_fields(L: int, p: ModelParams, boundary: int, field_mode="full") -> np.ndarray:
    """h_x + omega (J c_alpha - sum_{y in window} J_xy) for every window site."""
    pts = window_points(L, p.d)
    return field_array(pts, p, FieldMode.parse(field_mode)) + boundary * exterior_terms(pts, p)


def effective_field(x: tuple, window: Iterable[tuple], p: ModelParams, boundary: int, field_mode="full") -> float:
    from . import lattice

    pts = lattice.as_array(window)
    idx = [tuple(q) for q in pts.tolist()].index(tuple(x))
    h = field_array(pts[idx : idx + 1], p, FieldMode.parse(field_mode))[0]
    return float(h + boundary * exterior_terms(pts, p)[idx])


def _flat_positions(L: int, d: int) -> tuple:
    """Offset-table strides: K(x - y) = table[pos[x] - pos[y] + centre]."""
    side = 2 * L - 1
    strides = np.array([side ** (d - 1 - i) for i in range(d)], dtype=np.int64)
    rel = window_points(L, d) - window_points(L, d)[0]
    pos = rel @ strides
    centre = int((L - 1) * strides.sum())
    return pos.astype(np.int64), centre


# --------------------------------------------------------------- kernel


@numba.njit(cache=True)
def _local_fields(spins, table, pos, centre, b):
    N = spins.shape[0]
    loc = np.empty(N)
    for x in range(N):
        acc = b[x]
        px = pos[x] + centre
        for y in range(N):
            acc += table[px - pos[y]] * spins[y]
        loc[x] = acc
    return loc


@numba.njit(cache=True)
def _sweeps(spins, loc, table, pos, centre, b, beta, sites, uniforms, n_sweeps, measure_from, measure_every, origin_idx, out_m, out_e, out_s0, site_acc, start_index):
    """Run n_sweeps sweeps of N proposals; returns (accepted, measurements)."""
    N = spins.shape[0]
    accepted = 0
    k = 0
    for sw in range(n_sweeps):
        for t in range(N):
            x = sites[sw * N + t]
            dE = 2.0 * spins[x] * loc[x]
            if dE <= 0.0 or uniforms[sw * N + t] < math.exp(-beta * dE):
                s_old = spins[x]
                spins[x] = -s_old
                px = pos[x] - centre
                for y in range(N):
                    loc[y] -= 2.0 * s_old * table[pos[y] - px]
                # table at offset 0 is zero, so loc[x] is unchanged by the loop
                accepted += 1
        g = start_index + sw
        if g >= measure_from and (g - measure_from) % measure_every == 0:
            m = 0.0
            e = 0.0
            for y in range(N):
                m += spins[y]
                e += spins[y] * (loc[y] + b[y])
                site_acc[y] += spins[y]
            out_m[k] = m / N
            out_e[k] = -0.5 * e
            out_s0[k] = spins[origin_idx]
            k += 1
    return accepted, k


def _batch_se(x: np.ndarray, n_batches: int = 20) -> float:
    n = len(x)
    if n < 2 * n_batches:
        return float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    size = n // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def run(cfg: McConfig, chunk: int = 200) -> McResult:
    """Metropolis chain started from the boundary-valued configuration."""
    p = cfg.p
    d, L = p.d, cfg.L
    N = L**d
    pts = window_points(L, d)
    b = effective_fields(L, p, cfg.boundary, cfg.field_mode)
    table = _kernel_on_offsets((L,) * d, p).ravel()
    pos, centre = _flat_positions(L, d)
    # the kernel reads table[pos[y] - pos[x] + centre]
    spins = np.full(N, cfg.boundary, dtype=np.float64)
    loc = _local_fields(spins, table, pos, centre, b)
    origin_idx = int(np.nonzero(np.all(pts == 0, axis=1))[0][0])
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n_meas = len(range(cfg.burn_in, cfg.sweeps, cfg.measure_every))
    out_m = np.zeros(n_meas)
    out_e = np.zeros(n_meas)
    out_s0 = np.zeros(n_meas)
    site_acc = np.zeros(N)
    accepted = 0
    k = 0
    done = 0
    while done < cfg.sweeps:
        n = min(chunk, cfg.sweeps - done)
        sites = rng.integers(0, N, size=n * N)
        uniforms = rng.random(n * N)
        acc, kk = _sweeps(
            spins, loc, table, pos, centre, b, float(p.beta), sites, uniforms, n, cfg.burn_in, cfg.measure_every,
            origin_idx, out_m[k:], out_e[k:], out_s0[k:], site_acc, done,
        )
        accepted += acc
        k += kk
        done += n
    m = out_m[:k]
    return McResult(
        magnetization_mean=float(m.mean()),
        magnetization_abs_mean=float(np.abs(m).mean()),
        susceptibility_proxy=float(N * m.var()),
        energy_mean=float(out_e[:k].mean()),
        se_m=_batch_se(m),
        se_E=_batch_se(out_e[:k]),
        sigma0_mean=float(out_s0[:k].mean()),
        sigma0_se=_batch_se(out_s0[:k]),
        acceptance=accepted / (cfg.sweeps * N),
        n_measurements=k,
        site_means=site_acc / max(k, 1),
        effective_field=b,
        trace=m.copy() if cfg.keep_trace else None,
        final_spins=spins.astype(np.int8),
    )


def delta_energy(spins: np.ndarray, x: int, L: int, p: ModelParams, boundary: int, field_mode="full") -> float:
    """Energy change of flipping window site x (flat index), from local fields."""
    b = effective_fields(L, p, boundary, field_mode)
    table = _kernel_on_offsets((L,) * p.d, p).ravel()
    pos, centre = _flat_positions(L, p.d)
    loc = _local_fields(np.asarray(spins, dtype=np.float64), table, pos, centre, b)
    return float(2.0 * spins[x] * loc[x])


def acceptance_probability(dE: float, beta: float) -> float:
    return 1.0 if dE <= 0 else math.exp(-beta * dE)


# --------------------------------------------------------------- scans


SCAN_COLUMNS = ("d", "alpha", "delta", "J", "h_star", "beta", "L", "seed", "sweeps", "m_mean", "m_abs", "chi", "E_mean", "se_m")


def child_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint64)[0])


def _run_point(args) -> dict:
    cfg = args
    res = run(cfg)
    p = cfg.p
    return {
        "d": p.d,
        "alpha": p.alpha,
        "delta": p.delta,
        "J": p.J,
        "h_star": p.h_star,
        "beta": p.beta,
        "L": cfg.L,
        "seed": cfg.seed,
        "sweeps": cfg.sweeps,
        "m_mean": res.magnetization_mean,
        "m_abs": res.magnetization_abs_mean,
        "chi": res.susceptibility_proxy,
        "E_mean": res.energy_mean,
        "se_m": res.se_m,
    }


def worker_count(n_jobs: int) -> int:
    cap = os.environ.get("CTK_THREADS")
    n = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, n_jobs))


def grid_configs(template: McConfig, grid: Sequence[Mapping]) -> list:
    """One config per grid point; model overrides go to p, seeds from (master, index)."""
    out = []
    for i, point in enumerate(grid):
        over = {k: v for k, v in point.items() if k in ModelParams.__dataclass_fields__}
        rest = {k: v for k, v in point.items() if k not in over}
        p = template.p.replace(**{k: float(v) if k != "d" else int(v) for k, v in over.items()})
        out.append(replace(template, p=p, seed=child_seed(template.seed, i), **rest))
    return out


def scan(template: McConfig, grid: Sequence[Mapping], workers: int | None = None) -> list:
    cfgs = grid_configs(template, grid)
    n = workers or worker_count(len(cfgs))
    if n <= 1:
        return [_run_point(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(_run_point, cfgs))


def strict_check(p: ModelParams) -> None:
    """Refuse parameters outside the phase-transition region."""
    if constants.regime(p.d, p.alpha, p.delta) == "outside":
        raise ValueError(
            f"delta = {p.delta:g} < min(alpha - d, 1) = {min(p.alpha - p.d, 1):g}: "
            "outside the phase-transition region, where uniqueness is only conjectured"
        )


def write_csv(rows: Sequence[Mapping], path, header_lines: Sequence[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.DictWriter(fh, fieldnames=SCAN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items() if k in SCAN_COLUMNS})
