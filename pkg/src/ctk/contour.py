"""Incorrect points, (M, a, r)-partitions, contours and the erase map."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as cc_graph

from . import constants, lattice
from .lattice import ComplementLabels, CoverOptions, DEFAULT_COVER, Point
from .model import ModelParams, SpinConfiguration, c_alpha


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class ContourParams:
    M: float
    a: float
    r: int
    epsilon: float = 0.5

    def __post_init__(self):
        if not (self.M > 0 and self.a > 0 and self.r >= 1):
            raise ContourError(f"need M, a > 0 and r >= 1, got {self}")

    @property
    def max_family(self) -> int:
        return 2**self.r - 1

    def link_length(self, d: int, n: int) -> float:
        """Proximity-graph threshold M d^a 2^{an} at cube scale n."""
        return self.M * d**self.a * 2.0 ** (self.a * n)

    @classmethod
    def from_model(cls, p: ModelParams, epsilon: float = 0.5, M: float | None = None) -> "ContourParams":
        a = constants.a_exponent(p.d, p.alpha, epsilon)
        r = constants.stride_r(p.d, a)
        if M is None:
            M = constants.M_threshold(p.d, p.alpha, p.J, a, r, c_alpha(p))
        return cls(float(M), a, r, epsilon)

    def to_dict(self) -> dict:
        return {"M": self.M, "a": self.a, "r": self.r, "epsilon": self.epsilon}


# --------------------------------------------------------------- correctness


def theta(sigma: SpinConfiguration, x: Point) -> int:
    vals = sigma.values_at(lattice.ball_offsets(len(x), 1) + np.asarray(x))
    if np.all(vals == 1):
        return 1
    if np.all(vals == -1):
        return -1
    return 0


def boundary_array(sigma: SpinConfiguration) -> np.ndarray:
    """Incorrect points as a sorted (N, d) array."""
    d = sigma.d
    P = np.pad(sigma.spins, 2, constant_values=sigma.boundary)
    core = tuple(slice(1, -1) for _ in range(d))
    all_plus = P[core] == 1
    all_minus = P[core] == -1
    for ax in range(d):
        for shift in (-1, 1):
            sl = [slice(1, -1)] * d
            sl[ax] = slice(1 + shift, P.shape[ax] - 1 + shift)
            nb = P[tuple(sl)]
            all_plus &= nb == 1
            all_minus &= nb == -1
    bad = ~(all_plus | all_minus)
    return np.argwhere(bad) + (np.asarray(sigma.origin, dtype=np.int64) - 1)


def boundary(sigma: SpinConfiguration) -> frozenset:
    return lattice.from_array(boundary_array(sigma))


# --------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Part:
    support: frozenset
    witness: tuple
    scale: int | None = None

    def max_witness_diameter(self) -> int:
        return max(lattice.diameter(w) for w in self.witness)


@dataclass(frozen=True)
class PartitionOfBoundary:
    parts: tuple
    boundary: frozenset

    def __len__(self) -> int:
        return len(self.parts)

    def supports(self) -> list:
        return [p.support for p in self.parts]


def _sorted_parts(parts: Iterable[Part]) -> tuple:
    return tuple(sorted(parts, key=lambda p: min(p.support)))


def _cube_bounds(centers: np.ndarray, n: int) -> tuple:
    if n == 0:
        return centers, centers
    h = 1 << (n - 1)
    return centers * h - h, centers * h + h


def _box_distance_matrix(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    gap = np.maximum(lo[None, :, :] - hi[:, None, :], lo[:, None, :] - hi[None, :, :])
    return np.maximum(gap, 0).sum(axis=2)


def build_partition(
    points: Iterable[Point], cp: ContourParams, d: int | None = None, cover_opts: CoverOptions = DEFAULT_COVER
) -> PartitionOfBoundary:
    """Peel groups of at most 2^r - 1 nearby cubes, scale by scale.

    At scale n the remaining points are covered by a minimal family of
    n-cubes; cubes closer than M d^a 2^{an} are linked, and every component
    with at most 2^r - 1 cubes becomes a part. The witness pieces are the
    points of the part grouped by the first (lexicographic) cube containing
    them.
    """
    bset = frozenset(points)
    if not bset:
        return PartitionOfBoundary((), bset)
    rem = lattice.as_array(bset)
    d = rem.shape[1] if d is None else d
    parts = []
    n = 0
    while len(rem):
        if n == 0:
            centers = rem
        else:
            centers = np.asarray([c.center for c in lattice.minimal_cover(lattice.from_array(rem), n, cover_opts).cubes])
        lo, hi = _cube_bounds(centers, n)
        dist = _box_distance_matrix(lo, hi)
        adj = csr_matrix(dist <= cp.link_length(d, n))
        _, comp = cc_graph(adj, directed=False)
        inside = np.all((rem[None, :, :] >= lo[:, None, :]) & (rem[None, :, :] <= hi[:, None, :]), axis=2)
        owner = np.argmax(inside, axis=0)  # first cube containing each point
        sizes = np.bincount(comp)
        keep = np.ones(len(rem), dtype=bool)
        for c in np.nonzero(sizes <= cp.max_family)[0]:
            cubes = np.nonzero(comp == c)[0]
            pieces = []
            for k in cubes:
                sel = owner == k
                if sel.any():
                    pieces.append(lattice.from_array(rem[sel]))
            sel = comp[owner] == c
            keep &= ~sel
            pieces.sort(key=min)
            parts.append(Part(lattice.from_array(rem[sel]), tuple(pieces), n))
        rem = rem[keep]
        n += 1
    return PartitionOfBoundary(_sorted_parts(parts), bset)


@dataclass(frozen=True)
class Violation:
    condition: str
    parts: tuple
    detail: str


@dataclass(frozen=True)
class Verification:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def verify_partition(P: PartitionOfBoundary, cp: ContourParams, boundary_set: Iterable[Point] | None = None) -> Verification:
    """Check conditions A (disjoint, covering, nested) and B (witness families) of a partition."""
    out = []
    parts = P.parts
    target = P.boundary if boundary_set is None else frozenset(boundary_set)
    union: set = set()
    total = 0
    for p in parts:
        union |= p.support
        total += len(p.support)
    if total != len(union):
        out.append(Violation("A", (), "parts are not pairwise disjoint"))
    if frozenset(union) != target:
        out.append(Violation("A", (), f"union differs from the boundary ({len(union)} vs {len(target)} points)"))
    if any(not p.support for p in parts):
        out.append(Violation("A", (), "empty part"))
    labels = [ComplementLabels(p.support, halo=1) for p in parts]
    arrays = [lattice.as_array(p.support) for p in parts]
    for i, lab in enumerate(labels):
        for j, arr in enumerate(arrays):
            if i == j or not len(arr):
                continue
            seen = np.unique(lab.label_of(arr))
            if len(seen) != 1:
                out.append(Violation("A", (i, j), f"part {j} meets {len(seen)} complement components of part {i}"))
    diams = []
    for i, p in enumerate(parts):
        if not 1 <= len(p.witness) <= cp.max_family:
            out.append(Violation("B1", (i,), f"witness family has {len(p.witness)} pieces"))
        wu = frozenset().union(*p.witness) if p.witness else frozenset()
        if wu != p.support or any(not w for w in p.witness):
            out.append(Violation("B1", (i,), "witness pieces do not cover the part exactly"))
        diams.append(max((lattice.diameter(w) for w in p.witness if w), default=0))
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            need = cp.M * min(diams[i], diams[j]) ** cp.a
            dist = lattice.set_distance(arrays[i], arrays[j])
            if not dist > need:
                out.append(Violation("B2", (i, j), f"distance {dist} <= {need:.6g}"))
    return Verification(tuple(out))


def is_finer(P: PartitionOfBoundary, Q: PartitionOfBoundary) -> bool:
    """Every part of P lies inside some part of Q."""
    return all(any(p.support <= q.support for q in Q.parts) for p in P.parts)


def intersect_partitions(P: PartitionOfBoundary, Q: PartitionOfBoundary, cp: ContourParams | None = None) -> PartitionOfBoundary:
    """Common refinement of two partitions of the same boundary.

    For each nonempty p & q the witness family is the restriction of p's
    family to q or of q's family to p, whichever has the smaller largest
    piece, which keeps the distance condition inherited from both inputs.
    """
    if P.boundary != Q.boundary:
        raise ContourError("partitions of different boundary sets")
    parts = []
    for p in P.parts:
        for q in Q.parts:
            s = p.support & q.support
            if not s:
                continue
            fp = tuple(sorted((w & q.support for w in p.witness if w & q.support), key=min))
            fq = tuple(sorted((w & p.support for w in q.witness if w & p.support), key=min))
            dp = max(lattice.diameter(w) for w in fp)
            dq = max(lattice.diameter(w) for w in fq)
            wit = fp if dp <= dq else fq
            scale = None if p.scale is None or q.scale is None else min(p.scale, q.scale)
            parts.append(Part(s, wit, scale))
    return PartitionOfBoundary(_sorted_parts(parts), P.boundary)


# --------------------------------------------------------------- contours


@dataclass(frozen=True, eq=False)
class Contour:
    support: frozenset
    witness_family: tuple
    label_exterior: int
    interior: tuple  # ((component, label), ...) ordered by minimum point
    spins: tuple | None = None  # spin values on the sorted support
    scale: int | None = None

    def __len__(self) -> int:
        return len(self.support)

    @cached_property
    def I_plus(self) -> frozenset:
        return frozenset().union(*(c for c, lab in self.interior if lab == 1))

    @cached_property
    def I_minus(self) -> frozenset:
        return frozenset().union(*(c for c, lab in self.interior if lab == -1))

    @cached_property
    def interior_set(self) -> frozenset:
        return self.I_plus | self.I_minus

    @cached_property
    def volume(self) -> frozenset:
        return self.support | self.interior_set

    def same_as(self, other: "Contour") -> bool:
        return (
            self.support == other.support
            and self.label_exterior == other.label_exterior
            and dict(self.interior) == dict(other.interior)
        )

    def to_json(self) -> dict:
        return {
            "support": [list(p) for p in sorted(self.support)],
            "witness_family": [[list(p) for p in sorted(w)] for w in self.witness_family],
            "label_exterior": self.label_exterior,
            "interior_labels": [
                {"component": [list(p) for p in sorted(c)], "label": lab} for c, lab in self.interior
            ],
            "I_plus": [list(p) for p in sorted(self.I_plus)],
            "I_minus": [list(p) for p in sorted(self.I_minus)],
            "spins": None if self.spins is None else list(self.spins),
            "scale": self.scale,
        }

    @classmethod
    def from_json(cls, obj) -> "Contour":
        reg = lambda pts: frozenset(tuple(p) for p in pts)  # noqa: E731
        return cls(
            reg(obj["support"]),
            tuple(reg(w) for w in obj["witness_family"]),
            int(obj["label_exterior"]),
            tuple((reg(c["component"]), int(c["label"])) for c in obj["interior_labels"]),
            None if obj.get("spins") is None else tuple(obj["spins"]),
            obj.get("scale"),
        )


def _inner_boundary_of_mask(mask: np.ndarray) -> np.ndarray:
    """Cells of `mask` with a nearest neighbour outside it (mask is padded by >= 1)."""
    out = np.zeros_like(mask)
    for ax in range(mask.ndim):
        for shift in (-1, 1):
            out |= mask & ~np.roll(mask, shift, axis=ax)
    return out


def _constant_sign(sigma: SpinConfiguration, pts: np.ndarray, what: str) -> int:
    vals = np.unique(sigma.values_at(pts))
    if len(vals) != 1:
        raise ContourError(f"configuration is not constant on the inner boundary of {what}")
    return int(vals[0])


def label_and_build_contours(sigma: SpinConfiguration, P: PartitionOfBoundary) -> list:
    """Attach exterior and interior labels to every part.

    The exterior label is the sign of sigma on the inner boundary of V(part);
    each hole gets the sign on the inner boundary of its own volume.
    Non-constant signs raise ContourError.
    """
    out = []
    for part in P.parts:
        lab = ComplementLabels(part.support, halo=2)
        occ = lab.grid != 0  # V(part): the part plus its holes
        ib = np.argwhere(_inner_boundary_of_mask(occ)) + lab.origin
        ext = _constant_sign(sigma, ib, "a contour volume")
        interior = []
        for hole in lab.hole_arrays():
            sub = ComplementLabels(lattice.from_array(hole), halo=1)
            vmask = sub.grid != 0
            hib = np.argwhere(_inner_boundary_of_mask(vmask)) + sub.origin
            interior.append((lattice.from_array(hole), _constant_sign(sigma, hib, "an interior component")))
        interior.sort(key=lambda t: min(t[0]))
        sp = lattice.as_array(part.support)
        spins = tuple(int(v) for v in sigma.values_at(sp))
        out.append(Contour(part.support, part.witness, ext, tuple(interior), spins, part.scale))
    return out


def extract_contours(sigma: SpinConfiguration, cp: ContourParams, cover_opts: CoverOptions = DEFAULT_COVER) -> list:
    P = build_partition(boundary(sigma), cp, sigma.d, cover_opts)
    return label_and_build_contours(sigma, P)


def external_contours(contours: Sequence[Contour]) -> list:
    """Contours whose support lies in no other contour's interior."""
    out = []
    for i, g in enumerate(contours):
        if not any(i != j and g.support & h.interior_set for j, h in enumerate(contours)):
            out.append(g)
    return out


def _check_subfamily(sigma: SpinConfiguration, family: Sequence[Contour], cp: ContourParams | None):
    bset = boundary(sigma)
    for g in family:
        if not g.support <= bset:
            raise ContourError("contour support is not inside the boundary of the configuration")
        if g.spins is not None:
            vals = tuple(int(v) for v in sigma.values_at(lattice.as_array(g.support)))
            if vals != g.spins:
                raise ContourError("stored contour spins differ from the configuration")
    if cp is not None:
        own = extract_contours(sigma, cp)
        for g in family:
            if not any(g.same_as(h) for h in own):
                raise ContourError("contour is not among the contours of the configuration")


def erase(sigma: SpinConfiguration, family: Sequence[Contour], cp: ContourParams | None = None) -> SpinConfiguration:
    """tau_Gamma: supports to -1, I_+ flipped, everything else kept.

    Needs the minus boundary condition and contours with pairwise disjoint
    volumes. With `cp` the family is checked against a fresh extraction.
    """
    if sigma.boundary != -1:
        raise ContourError("erase needs the minus boundary condition")
    family = list(family)
    if not family:
        return sigma
    vols = [g.volume for g in family]
    for i in range(len(vols)):
        for j in range(i + 1, len(vols)):
            if vols[i] & vols[j]:
                raise ContourError("contour volumes overlap; erase takes an external family")
    _check_subfamily(sigma, family, cp)
    win = sigma.window_mask()
    o = np.asarray(sigma.origin)
    s = sigma.spins.copy()

    def idx(region):
        arr = lattice.as_array(region, sigma.d)
        if not len(arr):
            return None
        rel = arr - o
        ok = np.all((rel >= 0) & (rel < np.asarray(s.shape)), axis=1)
        rel = rel[ok]
        rel = rel[win[tuple(rel.T)]]
        return tuple(rel.T) if len(rel) else None

    for g in family:
        ip = idx(g.I_plus)
        if ip is not None:
            s[ip] = -s[ip]
        sp = idx(g.support)
        if sp is not None:
            s[sp] = -1
    return SpinConfiguration(sigma.origin, s, sigma.boundary, sigma.mask)


def erasure_problems(sigma: SpinConfiguration, tau: SpinConfiguration, family: Sequence[Contour], cp: ContourParams) -> list:
    """Postconditions of erase: no incorrect point left on the erased supports,
    and every contour of tau avoids them."""
    problems = []
    sp = frozenset().union(*(g.support for g in family)) if family else frozenset()
    left = boundary(tau) & sp
    if left:
        problems.append(f"{len(left)} incorrect points remain on erased supports")
    for h in external_contours(extract_contours(tau, cp)):
        if h.volume & sp:
            problems.append("a remaining external contour meets an erased support")
    return problems


def erase_all(sigma: SpinConfiguration, cp: ContourParams, max_rounds: int | None = None) -> tuple:
    """Erase external contours until none remain; returns (config, rounds)."""
    rounds = 0
    limit = max_rounds if max_rounds is not None else int(sigma.window_mask().sum()) + 1
    while True:
        cs = extract_contours(sigma, cp)
        if not cs:
            return sigma, rounds
        if rounds >= limit:
            raise ContourError("erase_all did not terminate")
        sigma = erase(sigma, external_contours(cs))
        rounds += 1


def reconstruct(family: Sequence[Contour], window: Iterable[Point], d: int | None = None) -> SpinConfiguration:
    """Canonical configuration carrying a family: minus outside, interiors by
    label from the outermost volume inwards, supports from stored spins."""
    win = frozenset(window)
    sigma = SpinConfiguration.from_points(win, None, -1)
    assign = {}
    for g in sorted(family, key=lambda g: -len(g.volume)):
        for comp, lab in g.interior:
            for p in comp:
                if p in win:
                    assign[p] = lab
        if g.spins is None:
            raise ContourError("reconstruction needs stored support spins")
        for p, v in zip(sorted(g.support), g.spins):
            if p in win:
                assign[p] = v
    return sigma.with_spins_at(assign)


def is_compatible(family: Sequence[Contour], window: Iterable[Point], cp: ContourParams) -> bool:
    """Semi-decision: does the canonical reconstruction carry every contour of the family?"""
    win = frozenset(window)
    if any(not g.support <= win for g in family):
        return False
    try:
        sigma = reconstruct(family, win)
        own = extract_contours(sigma, cp)
    except ContourError:
        return False
    return all(any(g.same_as(h) for h in own) for g in family)
