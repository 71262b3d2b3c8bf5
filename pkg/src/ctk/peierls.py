"""Energy cost of erasing contours, the Peierls constant chain, and exact
conditioned probabilities on tiny windows."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from . import constants, lattice
from .contour import (
    Contour,
    ContourError,
    ContourParams,
    _check_subfamily,
    erase,
    external_contours,
    extract_contours,
)
from .model import (
    ENUM_CAP,
    FieldMode,
    ModelParams,
    SpinConfiguration,
    enumerate_energies,
    field_sum,
    free_energy_form,
    hamiltonian,
    lattice_sum_radial,
    surface_energy,
)


class RegimeError(ValueError):
    pass


@dataclass(frozen=True)
class PeierlsConstants:
    d: int
    alpha: float
    J: float
    a: float
    r: int
    M: float
    c_alpha: float
    c_alpha_error: float
    k_alpha_1: float
    M_geometric: float
    M1: float
    M2: float
    M_threshold: float
    c2: float
    c3: float
    c4: float
    K_alpha: float
    c5: float | None
    above_threshold: bool

    @property
    def positive(self) -> bool:
        return self.c2 > 0 and self.c3 > 0 and self.c4 > 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["positive"] = self.positive
        return out


def peierls_constants(p: ModelParams, cp: ContourParams | None = None, M: float | None = None) -> PeierlsConstants:
    """All constants of the erase-cost bound at separation amplitude M.

    M defaults to cp.M, and cp defaults to the parameters derived from the
    model at the threshold M.
    """
    if cp is None:
        cp = ContourParams.from_model(p)
    M = cp.M if M is None else float(M)
    d, al, J = p.d, p.alpha, p.J
    est = lattice_sum_radial(p)
    k1 = constants.k_alpha_1(d, al, J, cp.a, cp.r)
    m_geo = constants.M_geometric(d, cp.r)
    m1 = constants.M1(d, al, J, k1, est.value)
    m2 = constants.M2(d, al, k1)
    thr = max(m_geo, m1, m2)
    c5 = constants.c5(d, p.delta, p.h_star) if p.delta < d else None
    return PeierlsConstants(
        d=d,
        alpha=al,
        J=J,
        a=cp.a,
        r=cp.r,
        M=M,
        c_alpha=est.value,
        c_alpha_error=est.error,
        k_alpha_1=k1,
        M_geometric=m_geo,
        M1=m1,
        M2=m2,
        M_threshold=thr,
        c2=constants.c2(d, al, J, est.value, k1, M),
        c3=constants.c3(d, al, k1, M),
        c4=constants.c4(d, al, k1, M),
        K_alpha=constants.K_alpha(d, al, J),
        c5=c5,
        above_threshold=M > thr,
    )


# --------------------------------------------------------------- energy cost


def energy_cost(sigma: SpinConfiguration, g: Contour, p: ModelParams) -> float:
    """H^-(sigma) - H^-(tau_g(sigma)) with zero field."""
    if sigma.boundary != -1:
        raise ContourError("energy cost is defined for the minus boundary condition")
    _check_subfamily(sigma, [g], None)
    tau = erase(sigma, [g])
    return hamiltonian(sigma, p, "zero") - hamiltonian(tau, p, "zero")


def energy_bound(g: Contour, pc: PeierlsConstants, p: ModelParams) -> float:
    """c2 |g| + c3 F(I_+) + c4 F(sp)."""
    f_plus = surface_energy(g.I_plus, p) if g.I_plus else 0.0
    return pc.c2 * len(g) + pc.c3 * f_plus + pc.c4 * surface_energy(g.support, p)


def triangle_ratio(x: tuple, y: tuple, p: ModelParams) -> float:
    """J_xy / ((2d+1)^{-1} 2^{-alpha} sum_{|x'-x| <= 1} J_x'y); >= 1 for x != y."""
    nb = [x] + lattice.neighbors(x)
    tot = sum(p.J * lattice.l1_distance(q, y) ** (-p.alpha) for q in nb if q != y)
    return (p.J * lattice.l1_distance(x, y) ** (-p.alpha)) / (tot / ((2 * p.d + 1) * 2**p.alpha))


# --------------------------------------------------------------- truncation


@dataclass(frozen=True)
class Truncation:
    regime: str
    R: float
    R_field: float
    R1: float | None = None
    R2: float | None = None
    h_star_max: float | None = None
    h_star_ok: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def truncation_radius(p: ModelParams, pc: PeierlsConstants) -> Truncation:
    """Radius beyond which the field cannot beat the erase cost.

    On the critical lines the answer is a smallness condition on h*
    instead of a radius term.
    """
    d, al, de = p.d, p.alpha, p.delta
    reg = constants.regime(d, al, de)
    if reg == "outside":
        raise RegimeError(
            f"(alpha - d, delta) = ({al - d:g}, {de:g}) has delta < min(alpha - d, 1): "
            "outside the phase-transition region, where uniqueness is only conjectured"
        )
    if de >= d:
        raise RegimeError(f"delta = {de:g} >= d = {d}: the field is summable and c5 is undefined")
    if not pc.positive:
        raise RegimeError("c2, c3, c4 must be positive; raise M above the threshold")
    if p.h_star == 0:
        return Truncation(reg, 0.0, 0.0, note="zero field")
    c5 = constants.c5(d, de, p.h_star)
    rf = constants.R_field(de, p.h_star, pc.c2)
    if reg == "short":
        r1 = constants.R1(d, al, de, c5, pc.c3, pc.K_alpha)
        return Truncation(reg, max(rf, r1), rf, R1=r1)
    if reg == "long":
        r2 = constants.R2(d, de, p.h_star, c5, pc.c3, pc.K_alpha)
        return Truncation(reg, max(rf, r2), rf, R2=r2)
    hmax = constants.h_star_critical(d, de, pc.c3, pc.K_alpha)
    return Truncation(
        reg, rf, rf, h_star_max=hmax, h_star_ok=p.h_star <= hmax, note="critical line: needs h* <= h_star_max"
    )


# --------------------------------------------------------------- Peierls sum


def peierls_sum(beta: float, c2: float, c1: float) -> float:
    """sum_{m >= 1} x^m with x = exp(c1 + log 2 - beta c2 / 2); inf if x >= 1."""
    if not c2 > 0:
        raise RegimeError("c2 must be positive")
    logx = c1 + math.log(2) - beta * c2 / 2
    if logx >= 0:
        return math.inf
    x = math.exp(logx)
    return x / (1 - x)


def peierls_beta_c(c1: float, c2: float) -> float:
    """Smallest beta with peierls_sum < 1/2 (x < 1/3)."""
    if not c2 > 0:
        raise RegimeError("c2 must be positive")
    return constants.beta_c(c1, c2)


# --------------------------------------------------------------- droplet heuristic


@dataclass(frozen=True)
class DropletResult:
    value: float
    terms: tuple
    warnings: tuple = field(default_factory=tuple)


def droplet_heuristic(p: ModelParams, beta: float, R_max: int, field_mode="full") -> DropletResult:
    """sum_{R=1}^{R_max} R^d exp(-beta (2dJ R^{d-1} + F(B_R) - sum_{B_R} h)); diagnostic only."""
    if R_max < 1:
        raise ValueError("R_max must be >= 1")
    d = p.d
    terms = []
    for R in range(1, R_max + 1):
        ball = lattice.ball_offsets(d, R)
        energy = 2 * d * p.J * R ** (d - 1) + surface_energy(ball, p) - field_sum(ball, p, FieldMode.parse(field_mode))
        terms.append(R**d * math.exp(-beta * energy))
    warns = []
    if beta == 0:
        warns.append("beta = 0: the sum grows without bound in R_max")
    if len(terms) >= 3 and terms[-1] > terms[-2] > terms[-3]:
        warns.append("summand increasing at R_max: the field beats the surface energy")
    return DropletResult(math.fsum(terms), tuple(terms), tuple(warns))


# --------------------------------------------------------------- exact nu


@dataclass(frozen=True)
class NuResult:
    probability: float
    log_Z: float
    n_free: int
    forced: int
    warnings: tuple = ()


def collar(window: Iterable[tuple]) -> frozenset:
    """Sites forced by requiring every inner-boundary site to be correct."""
    win = frozenset(window)
    d = lattice.dim_of(win)
    out = set()
    for x in lattice.inner_boundary(win):
        for y in lattice.ball_offsets(d, 1) + np.asarray(x):
            t = tuple(y.tolist())
            if t in win:
                out.add(t)
    return frozenset(out)


def nu_exact(
    window: Iterable[tuple],
    p: ModelParams,
    boundary: int = -1,
    field_mode="full",
    site: tuple | None = None,
    sign: int = 1,
    cap: int = ENUM_CAP,
) -> NuResult:
    """Probability that `site` carries `sign` under the finite-volume measure
    with exterior `boundary`, conditioned on every inner-boundary site of the
    window being correct with the boundary sign."""
    win = frozenset(window)
    pts = lattice.as_array(win)
    d = pts.shape[1]
    site = (0,) * d if site is None else tuple(site)
    if site not in win:
        raise ValueError("site outside the window")
    forced = collar(win)
    fixed = {q: boundary for q in forced}
    f_idx, form = free_energy_form(pts, p, boundary, field_mode, fixed)
    warns = ()
    if len(f_idx) == 0:
        warns = ("conditioning fixes every site of the window",)
    pos = {tuple(q): i for i, q in enumerate(pts[f_idx].tolist())}
    logs_all, logs_hit = [], []
    for S, E in enumerate_energies(form, cap):
        lw = -p.beta * E
        logs_all.append(logsumexp(lw))
        if site in pos:
            hit = S[:, pos[site]] == sign
            if hit.any():
                logs_hit.append(logsumexp(lw[hit]))
    logZ = float(logsumexp(logs_all))
    if site in pos:
        prob = math.exp(float(logsumexp(logs_hit)) - logZ) if logs_hit else 0.0
    else:
        prob = 1.0 if boundary == sign else 0.0
    return NuResult(prob, logZ, len(f_idx), len(forced), warns)


def nu_minus_exact(window, p: ModelParams, field_mode="full", cap: int = ENUM_CAP) -> NuResult:
    """nu^-(sigma_0 = +1)."""
    return nu_exact(window, p, -1, field_mode, None, 1, cap)


def restricted_log_partition(
    window: Iterable[tuple], sub: Iterable[tuple], p: ModelParams, cp: ContourParams, field_mode="full", cap: int = 14
) -> float:
    """log of the minus-boundary partition function over configurations whose
    external contours all have volume inside `sub`."""
    win = frozenset(window)
    subset = frozenset(sub)
    pts = lattice.as_array(win)
    if len(pts) > cap:
        raise ValueError(f"{len(pts)} sites exceeds the cap of {cap}")
    base = SpinConfiguration.from_points(win, None, -1)
    _, form = free_energy_form(pts, p, -1, field_mode)
    logs = []
    for S, E in enumerate_energies(form, cap):
        for s, e in zip(S, E):
            sigma = base.with_values(s.astype(np.int8))
            ext = external_contours(extract_contours(sigma, cp))
            if all(g.volume <= subset for g in ext):
                logs.append(-p.beta * e)
    return float(logsumexp(logs)) if logs else -math.inf
