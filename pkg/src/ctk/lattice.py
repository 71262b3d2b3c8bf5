"""Integer-lattice geometry on Z^d with the l1 norm.

Points are tuples of ints, regions are frozensets of points. Every
set-valued output is ordered lexicographically so that runs are
reproducible bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

Point = tuple
Region = frozenset


class GeometryError(ValueError):
    pass


def region(points: Iterable[Sequence[int]]) -> frozenset:
    pts = frozenset(tuple(int(c) for c in p) for p in points)
    dims = {len(p) for p in pts}
    if len(dims) > 1:
        raise GeometryError(f"mixed dimensions in region: {sorted(dims)}")
    return pts


def dim_of(points: Iterable[Point]) -> int:
    for p in points:
        return len(p)
    raise GeometryError("cannot infer dimension of an empty region")


def as_array(points: Iterable[Point], d: int | None = None) -> np.ndarray:
    """Sorted (N, d) int64 array of a region; arrays pass through unchanged."""
    if isinstance(points, np.ndarray):
        return np.asarray(points, dtype=np.int64).reshape(len(points), -1)
    pts = sorted(points)
    if not pts:
        return np.zeros((0, d or 0), dtype=np.int64)
    return np.asarray(pts, dtype=np.int64).reshape(len(pts), -1)


def from_array(arr: np.ndarray) -> frozenset:
    return frozenset(map(tuple, np.asarray(arr, dtype=np.int64).tolist()))


def l1_distance(p: Point, q: Point) -> int:
    if len(p) != len(q):
        raise GeometryError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return sum(abs(a - b) for a, b in zip(p, q))


def l1_norm(p: Point) -> int:
    return sum(abs(c) for c in p)


@lru_cache(maxsize=256)
def _ball_offsets(d: int, R: int) -> np.ndarray:
    if R == 0:
        return np.zeros((1, d), dtype=np.int64)
    axes = [np.arange(-R, R + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.abs(grid).sum(axis=1) <= R
    out = grid[keep]
    out.setflags(write=False)
    return out


def ball_offsets(d: int, R: int) -> np.ndarray:
    """Offsets of B_R(0) in lexicographic order."""
    if R < 0:
        raise GeometryError("radius must be nonnegative")
    return _ball_offsets(d, R)


def l1_ball(center: Point, R: int) -> frozenset:
    c = np.asarray(center, dtype=np.int64)
    return from_array(ball_offsets(len(center), R) + c)


@lru_cache(maxsize=None)
def sphere_count(d: int, n: int) -> int:
    """Number of integer points with |x|_1 = n, n >= 1.

    A point on the sphere with exactly j nonzero coordinates is a choice of
    support, signs and a composition of n into j positive parts. With
    k = d - j this reads sum_k 2^{d-k} C(d,k) C(n-1, d-k-1); the terms with
    j > n vanish, so for n < d the sum starts at k = d - n.
    """
    if d < 1 or n < 1:
        raise GeometryError("need d >= 1 and n >= 1")
    start = max(0, d - n)
    return sum(2 ** (d - k) * math.comb(d, k) * math.comb(n - 1, d - k - 1) for k in range(start, d))


def ball_count(d: int, R: int) -> int:
    return 1 + sum(sphere_count(d, n) for n in range(1, R + 1))


def diameter(points: Iterable[Point]) -> int:
    """Max pairwise l1 distance, via max over sign vectors of the spread of s.x."""
    arr = as_array(points)
    if len(arr) == 0:
        raise GeometryError("diameter of an empty region")
    d = arr.shape[1]
    best = 0
    for tail in itertools.product((1, -1), repeat=d - 1):
        s = np.array((1,) + tail, dtype=np.int64)
        proj = arr @ s
        best = max(best, int(proj.max() - proj.min()))
    return best


def set_distance(a: Iterable[Point], b: Iterable[Point]) -> int:
    """Min l1 distance between two nonempty regions."""
    from scipy.spatial import cKDTree

    A, B = as_array(a), as_array(b)
    if len(A) == 0 or len(B) == 0:
        raise GeometryError("distance to an empty region")
    if len(A) * len(B) <= 4096:
        return int(np.abs(A[:, None, :] - B[None, :, :]).sum(axis=2).min())
    if len(A) < len(B):
        A, B = B, A
    dist, _ = cKDTree(B).query(A, k=1, p=1)
    return int(round(float(dist.min())))


def unit_vectors(d: int) -> list:
    out = []
    for i in range(d):
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            out.append(tuple(e))
    return out


def neighbors(p: Point) -> list:
    return [tuple(a + b for a, b in zip(p, e)) for e in unit_vectors(len(p))]


def inner_boundary(points: Iterable[Point]) -> frozenset:
    pts = frozenset(points)
    return frozenset(p for p in pts if any(q not in pts for q in neighbors(p)))


def edge_boundary(points: Iterable[Point]) -> frozenset:
    """Nearest-neighbour edges crossing the region, each as a sorted pair."""
    pts = frozenset(points)
    edges = set()
    for p in pts:
        for q in neighbors(p):
            if q not in pts:
                edges.add((p, q) if p < q else (q, p))
    return frozenset(edges)


def outer_boundary(points: Iterable[Point]) -> frozenset:
    pts = frozenset(points)
    return frozenset(q for p in pts for q in neighbors(p) if q not in pts)


def connected_components(points: Iterable[Point]) -> list:
    """Nearest-neighbour components, ordered by their minimum point."""
    remaining = set(points)
    comps = []
    for start in sorted(remaining):
        if start not in remaining:
            continue
        remaining.discard(start)
        comp = [start]
        stack = [start]
        while stack:
            p = stack.pop()
            for q in neighbors(p):
                if q in remaining:
                    remaining.discard(q)
                    comp.append(q)
                    stack.append(q)
        comps.append(frozenset(comp))
    return comps


def is_connected(points: Iterable[Point]) -> bool:
    pts = frozenset(points)
    return len(pts) > 0 and len(connected_components(pts)) == 1


class ComplementLabels:
    """Labelled components of the complement of a finite region.

    Label 0 is the unbounded component; bounded components get 1, 2, ...
    ordered by their minimum point. Queries outside the labelled box
    return 0, which is correct because the box carries a halo.
    """

    def __init__(self, points: Iterable[Point], halo: int = 2, d: int | None = None):
        if halo < 1:
            raise GeometryError("halo must be at least 1")
        arr = as_array(points, d)
        self.d = arr.shape[1] if len(arr) else (d or 1)
        self.points = arr
        if len(arr) == 0:
            self.origin = np.zeros(self.d, dtype=np.int64)
            self.grid = np.zeros((1,) * self.d, dtype=np.int64)
            self.n_holes = 0
            self.occupied = np.zeros((1,) * self.d, dtype=bool)
            return
        lo = arr.min(axis=0) - halo
        hi = arr.max(axis=0) + halo
        self.origin = lo
        occ = np.zeros(tuple((hi - lo + 1).tolist()), dtype=bool)
        occ[tuple((arr - lo).T)] = True
        struct = ndimage.generate_binary_structure(self.d, 1)
        raw, n = ndimage.label(~occ, structure=struct)
        outer = raw[(0,) * self.d]
        # relabel: unbounded -> 0, holes -> 1.. by first occurrence in C order
        # (C order on the box is lexicographic order of points)
        flat = raw.ravel()
        _, first = np.unique(flat, return_index=True)
        labels_sorted = [lab for lab in np.unique(flat)[np.argsort(first)] if lab not in (0, outer)]
        remap = np.zeros(n + 1, dtype=np.int64)
        for i, lab in enumerate(labels_sorted, start=1):
            remap[lab] = i
        grid = remap[raw]
        grid[occ] = -1
        self.grid = grid
        self.occupied = occ
        self.n_holes = len(labels_sorted)

    def label_of(self, pts: np.ndarray) -> np.ndarray:
        """Labels for an (N, d) array; -1 marks points of the region itself."""
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, self.d)
        rel = pts - self.origin
        shape = np.asarray(self.grid.shape)
        inside = np.all((rel >= 0) & (rel < shape), axis=1)
        out = np.zeros(len(pts), dtype=np.int64)
        if inside.any():
            out[inside] = self.grid[tuple(rel[inside].T)]
        return out

    def hole_arrays(self) -> list:
        out = []
        for k in range(1, self.n_holes + 1):
            idx = np.argwhere(self.grid == k) + self.origin
            out.append(idx)
        return out

    def holes(self) -> list:
        return [from_array(a) for a in self.hole_arrays()]


def volume_and_interior(points: Iterable[Point], halo: int = 2) -> tuple:
    """(V, I): V is the complement of the unbounded component of the complement."""
    pts = frozenset(points)
    if not pts:
        return frozenset(), frozenset()
    lab = ComplementLabels(pts, halo=halo)
    interior = frozenset().union(*lab.holes()) if lab.n_holes else frozenset()
    return pts | interior, interior


def interior_components(points: Iterable[Point], halo: int = 2) -> list:
    pts = frozenset(points)
    if not pts:
        return []
    return ComplementLabels(pts, halo=halo).holes()


# ---------------------------------------------------------------- dyadic cubes


@dataclass(frozen=True, order=True)
class Cube:
    """C_n(x): the product of [2^{n-1}x_i - 2^{n-1}, 2^{n-1}x_i + 2^{n-1}]; C_0(x) = {x}."""

    scale: int
    center: tuple

    def __post_init__(self):
        if self.scale < 0:
            raise GeometryError("cube scale must be nonnegative")

    @property
    def d(self) -> int:
        return len(self.center)

    def bounds(self) -> tuple:
        c = np.asarray(self.center, dtype=np.int64)
        if self.scale == 0:
            return c, c.copy()
        h = 1 << (self.scale - 1)
        return h * c - h, h * c + h

    def contains(self, p: Point) -> bool:
        lo, hi = self.bounds()
        return all(lo_i <= x <= hi_i for lo_i, x, hi_i in zip(lo.tolist(), p, hi.tolist()))

    def points(self) -> frozenset:
        return cube_points(self)

    def to_json(self) -> dict:
        return {"scale": self.scale, "center": list(self.center)}


def cube_points(c: Cube) -> frozenset:
    lo, hi = c.bounds()
    axes = [range(a, b + 1) for a, b in zip(lo.tolist(), hi.tolist())]
    return frozenset(itertools.product(*axes))


def candidate_centers(p: Sequence[int], n: int) -> list:
    """All x with p in C_n(x), lexicographic; at most 3^d of them."""
    if n == 0:
        return [tuple(p)]
    h = 1 << (n - 1)
    ranges = [range(-(-c // h) - 1, c // h + 2) for c in p]
    return list(itertools.product(*ranges))


def _candidate_array(arr: np.ndarray, n: int) -> np.ndarray:
    """Unique candidate centers for an (N, d) array of points, sorted."""
    if n == 0:
        return np.unique(arr, axis=0)
    h = 1 << (n - 1)
    lo = -((-arr) // h) - 1
    hi = arr // h + 1
    d = arr.shape[1]
    offs = np.array(list(itertools.product(range(3), repeat=d)), dtype=np.int64)
    cand = (lo[:, None, :] + offs[None, :, :]).reshape(-1, d)
    ok = np.all(cand <= np.repeat(hi, len(offs), axis=0), axis=1)
    return np.unique(cand[ok], axis=0)


def cube_contains_array(centers: np.ndarray, n: int, pts: np.ndarray) -> np.ndarray:
    """Boolean (K, N) matrix: cube k contains point j."""
    if n == 0:
        return np.all(centers[:, None, :] == pts[None, :, :], axis=2)
    h = 1 << (n - 1)
    lo = centers * h - h
    hi = centers * h + h
    return np.all((pts[None, :, :] >= lo[:, None, :]) & (pts[None, :, :] <= hi[:, None, :]), axis=2)


@dataclass(frozen=True)
class Cover:
    scale: int
    cubes: tuple
    exact: bool

    def __len__(self) -> int:
        return len(self.cubes)

    def union(self) -> frozenset:
        out: set = set()
        for c in self.cubes:
            out |= cube_points(c)
        return frozenset(out)


@dataclass(frozen=True)
class CoverOptions:
    """Limits for the exact set-cover search.

    Components of the candidate-sharing graph with more than exact_limit
    points, or searches exceeding node_budget nodes, fall back to greedy
    and the resulting cover is flagged inexact.
    """

    exact_limit: int = 96
    node_budget: int = 200_000


DEFAULT_COVER = CoverOptions()


def minimal_cover(points: Iterable[Point], n: int, opts: CoverOptions = DEFAULT_COVER) -> Cover:
    """Minimum-cardinality cover of a region by scale-n cubes."""
    arr = as_array(points)
    if len(arr) == 0:
        raise GeometryError("cover of an empty region")
    if n == 0:
        return Cover(0, tuple(Cube(0, tuple(p)) for p in arr.tolist()), True)
    cands = _candidate_array(arr, n)
    inc = cube_contains_array(cands, n, arr)  # (K, N)
    masks = [int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little") for row in inc]
    masks = _reduce_dominated(masks)
    chosen, exact = _set_cover(masks, len(arr), opts)
    cubes = tuple(sorted(Cube(n, tuple(cands[k].tolist())) for k in chosen))
    return Cover(n, cubes, exact)


def cover_size(points: Iterable[Point], n: int, opts: CoverOptions = DEFAULT_COVER) -> int:
    return len(minimal_cover(points, n, opts))


def _reduce_dominated(masks: list) -> dict:
    """Keep only maximal masks; among equal masks keep the first (smallest center)."""
    order = sorted(range(len(masks)), key=lambda k: (-bin(masks[k]).count("1"), k))
    kept: dict = {}
    for k in order:
        m = masks[k]
        if any(m | km == km for km in kept.values()):
            continue
        kept[k] = m
    return dict(sorted(kept.items()))


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _set_cover(masks: dict, n_points: int, opts: CoverOptions) -> tuple:
    """Exact set cover by branch and bound, per independent component."""
    keys = list(masks)
    covering = [[] for _ in range(n_points)]
    for k in keys:
        m = masks[k]
        j = 0
        while m:
            if m & 1:
                covering[j].append(k)
            m >>= 1
            j += 1
    # components of the point graph (points sharing a candidate)
    seen = [False] * n_points
    chosen: list = []
    exact = True
    for s in range(n_points):
        if seen[s]:
            continue
        comp_pts = []
        stack = [s]
        seen[s] = True
        comp_keys: set = set()
        while stack:
            j = stack.pop()
            comp_pts.append(j)
            for k in covering[j]:
                if k in comp_keys:
                    continue
                comp_keys.add(k)
                m, i = masks[k], 0
                while m:
                    if m & 1 and not seen[i]:
                        seen[i] = True
                        stack.append(i)
                    m >>= 1
                    i += 1
        target = 0
        for j in comp_pts:
            target |= 1 << j
        sub = {k: masks[k] for k in sorted(comp_keys)}
        if len(comp_pts) > opts.exact_limit:
            chosen.extend(_greedy(sub, target))
            exact = False
            continue
        sol, ok = _branch_and_bound(sub, target, covering, opts.node_budget)
        chosen.extend(sol)
        exact = exact and ok
    return chosen, exact


def _greedy(masks: dict, target: int) -> list:
    out = []
    left = target
    while left:
        best_k, best_gain = None, 0
        for k, m in masks.items():
            g = _popcount(m & left)
            if g > best_gain:
                best_k, best_gain = k, g
        out.append(best_k)
        left &= ~masks[best_k]
    return out


def _branch_and_bound(masks: dict, target: int, covering: list, budget: int) -> tuple:
    best = _greedy(masks, target)
    if len(best) <= 1:
        return best, True
    nbr = {}
    bits = []
    t = target
    j = 0
    while t:
        if t & 1:
            bits.append(j)
        t >>= 1
        j += 1
    for j in bits:
        u = 0
        for k in covering[j]:
            u |= masks[k]
        nbr[j] = u

    def lower_bound(left: int) -> int:
        # points pairwise sharing no cube need distinct cubes
        count = 0
        avail = left
        while avail:
            low = avail & -avail
            j = low.bit_length() - 1
            count += 1
            avail &= ~nbr[j]
        return count

    state = {"nodes": 0, "best": list(best), "aborted": False}

    def rec(left: int, path: list):
        if state["aborted"]:
            return
        state["nodes"] += 1
        if state["nodes"] > budget:
            state["aborted"] = True
            return
        if not left:
            if len(path) < len(state["best"]):
                state["best"] = list(path)
            return
        if len(path) + lower_bound(left) >= len(state["best"]):
            return
        # branch on the uncovered point with the fewest covering cubes
        opts_best = None
        m = left
        while m:
            low = m & -m
            j = low.bit_length() - 1
            c = covering[j]
            if opts_best is None or len(c) < len(opts_best):
                opts_best = c
                if len(c) == 1:
                    break
            m ^= low
        ordered = sorted(opts_best, key=lambda k: (-_popcount(masks[k] & left), k))
        for k in ordered:
            path.append(k)
            rec(left & ~masks[k], path)
            path.pop()

    rec(target, [])
    return state["best"], not state["aborted"]
