"""Total volume, subordinated covers, tree covers and exhaustive entropy counts."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from . import constants, lattice
from .contour import ContourParams, Contour
from .lattice import CoverOptions, Cube, DEFAULT_COVER, Point


class CapExceeded(ValueError):
    pass


def n_r(points: Iterable[Point], r: int) -> int:
    """Smallest n >= 0 with 2^{rn} >= diam; 0 when diam <= 1."""
    D = lattice.diameter(points)
    if D <= 1:
        return 0
    n = 0
    while (1 << (r * n)) < D:
        n += 1
    return n


@dataclass(frozen=True)
class CoverHierarchy:
    r: int
    levels: tuple  # Cover objects at scales 0, r, 2r, ...

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.levels)

    @property
    def sizes(self) -> tuple:
        return tuple(len(c) for c in self.levels)

    @property
    def total(self) -> int:
        return sum(self.sizes)


def cover_hierarchy(points: Iterable[Point], r: int, opts: CoverOptions = DEFAULT_COVER) -> CoverHierarchy:
    pts = frozenset(points)
    if not pts:
        raise lattice.GeometryError("total volume of an empty region")
    top = n_r(pts, r)
    return CoverHierarchy(r, tuple(lattice.minimal_cover(pts, r * n, opts) for n in range(top + 1)))


def total_volume(points: Iterable[Point], r: int, opts: CoverOptions = DEFAULT_COVER) -> int:
    """V_r = sum over n = 0..n_r of the minimal r n-cube cover sizes."""
    return cover_hierarchy(points, r, opts).total


def is_subordinated(child: Sequence[Cube], parent: Sequence[Cube], opts: CoverOptions = DEFAULT_COVER) -> bool:
    """Parent is a minimal cover of the union of the child cubes."""
    if not child:
        return not parent
    union = frozenset().union(*(lattice.cube_points(c) for c in child))
    if any(not any(c.contains(p) for c in parent) for p in union):
        return False
    return lattice.cover_size(union, parent[0].scale, opts) == len(parent)


def count_subordinate_covers(parent: Sequence[Cube], v_target: int, child_scale: int, budget: int = 200_000) -> int:
    """Number of v_target-element collections of child cubes subordinated to `parent`."""
    parent = list(parent)
    if not parent:
        return 0 if v_target >= 1 else 1
    union = frozenset().union(*(lattice.cube_points(c) for c in parent))
    cands = set()
    for p in union:
        for x in lattice.candidate_centers(p, child_scale):
            cands.add(x)
    cands = sorted(c for c in (Cube(child_scale, x) for x in cands) if lattice.cube_points(c) <= union)
    total = math.comb(len(cands), v_target)
    if total > budget:
        raise CapExceeded(f"{total} candidate collections exceed the budget of {budget}")
    count = 0
    for combo in itertools.combinations(cands, v_target):
        if is_subordinated(combo, parent):
            count += 1
    return count


# --------------------------------------------------------------- tree cover


def tree_cover(G: nx.Graph, k: int) -> list:
    """At most ceil(|V|/k) connected vertex sets of size <= 2k covering G.

    Works on a BFS spanning tree rooted at the smallest vertex: repeatedly
    take the deepest vertex u whose subtree has >= k vertices, gather child
    subtrees (each < k) until their total reaches k, cut them off together
    with u, and keep u in the remaining tree unless its whole subtree went.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if G.number_of_nodes() == 0:
        raise ValueError("empty graph")
    if not nx.is_connected(G):
        raise ValueError("tree_cover needs a connected graph")
    root = min(G.nodes)
    T = nx.bfs_tree(G, root)
    children = {u: sorted(T.successors(u)) for u in T.nodes}
    depth = nx.single_source_shortest_path_length(T, root)
    alive = set(T.nodes)
    pieces = []
    while alive:
        if len(alive) < k:
            pieces.append(frozenset(alive))
            break
        size = {}
        for u in sorted(alive, key=lambda v: -depth[v]):
            size[u] = 1 + sum(size[c] for c in children[u] if c in alive)
        heavy = sorted(u for u in alive if size[u] >= k)
        u = max(heavy, key=depth.get)
        kids = [c for c in children[u] if c in alive]
        acc, taken = 0, []
        for c in kids:
            taken.append(c)
            acc += size[c]
            if acc >= k:
                break
        cut = set()
        for c in taken:
            cut |= _subtree(c, children, alive)
        if acc >= k:
            piece = cut | {u}
            alive -= cut
        else:
            cut.add(u)
            piece = cut
            alive -= cut
        pieces.append(frozenset(piece))
    return pieces


def _subtree(u, children, alive) -> set:
    out, stack = set(), [u]
    while stack:
        v = stack.pop()
        out.add(v)
        stack.extend(c for c in children[v] if c in alive)
    return out


# --------------------------------------------------------------- F_V


def _fits_one_cube(P: np.ndarray, n: int) -> np.ndarray:
    """P: (..., m, d) point groups; True where one n-cube holds the whole group."""
    if n == 0:
        return np.all(P == P[..., :1, :], axis=(-2, -1))
    h = 1 << (n - 1)
    hi = -((-P.max(axis=-2)) // h)
    lo = P.min(axis=-2) // h
    return np.all(hi - lo <= 2, axis=-1)


def _nr_from_diam(D: np.ndarray, r: int) -> np.ndarray:
    out = np.zeros(D.shape, dtype=np.int64)
    n = 0
    left = D > 1
    while left.any():
        n += 1
        step = left & ((1 << (r * n)) >= D)
        out[step] = n
        left &= ~step
    return out


def _pair_volume(y: np.ndarray, r: int) -> np.ndarray:
    """V_r({0, y}) for an (N, d) array of nonzero y."""
    zero = np.zeros_like(y)
    P = np.stack([zero, y], axis=1)
    D = np.abs(y).sum(axis=1)
    top = _nr_from_diam(D, r)
    V = np.full(len(y), 2, dtype=np.int64)
    for n in range(1, int(top.max(initial=0)) + 1):
        act = top >= n
        V[act] += np.where(_fits_one_cube(P[act], r * n), 1, 2)
    return V


def _triple_volume(y: np.ndarray, Z: np.ndarray, r: int) -> np.ndarray:
    """V_r({0, y, z}) for one y against an (N, d) array of z."""
    zero = np.zeros_like(Z)
    Y = np.broadcast_to(y, Z.shape)
    P = np.stack([zero, Y, Z], axis=1)
    D = np.maximum.reduce([np.abs(Y).sum(1), np.abs(Z).sum(1), np.abs(Y - Z).sum(1)])
    top = _nr_from_diam(D, r)
    V = np.full(len(Z), 3, dtype=np.int64)
    for n in range(1, int(top.max(initial=0)) + 1):
        act = top >= n
        Pa = P[act]
        s = r * n
        one = _fits_one_cube(Pa, s)
        pair = (
            _fits_one_cube(Pa[:, [0, 1]], s) | _fits_one_cube(Pa[:, [0, 2]], s) | _fits_one_cube(Pa[:, [1, 2]], s)
        )
        V[act] += np.where(one, 1, np.where(pair, 2, 3))
    return V


def _size_bounds(V: int, r: int) -> list:
    """(k, radius) pairs: a set in F_V with k points has n_r <= V - k, hence
    diam <= 2^{r(V-k)}, and diam <= 1 when k = V."""
    out = []
    for k in range(1, V + 1):
        R = 1 if k == V else 1 << (r * (V - k))
        out.append((k, R))
    return out


def count_FV(V: int, d: int, r: int, budget: int = 50_000_000) -> int:
    """|F_V| = #{L containing 0 with V_r(L) = V}, by exhaustive search."""
    return sum(len(x) if isinstance(x, list) else x for x in _fv_search(V, d, r, budget, listing=False))


def enumerate_FV(V: int, d: int, r: int, budget: int = 5_000_000, list_cap: int = 200_000) -> list:
    out = []
    for chunk in _fv_search(V, d, r, budget, listing=True):
        out.extend(chunk)
        if len(out) > list_cap:
            raise CapExceeded(f"more than {list_cap} sets in F_{V}; use count_FV")
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def _pair_candidates(V: int, d: int, r: int, budget: int) -> np.ndarray:
    """Nonzero y that can give V_r({0, y}) = V.

    For a pair the top level always needs one cube, and every other level
    one or two, so V >= 2 + n_r. Either n_r <= V - 3, which bounds |y| by
    2^{r(V-3)}, or n_r = V - 2 and every level below the top needs a single
    cube; level 1 then forces |y_i| <= 2^r.
    """
    R_low = 1 if V <= 3 else 1 << (r * (V - 3))
    R_top = 1 << (r * (V - 2))
    size = lattice.ball_count(d, R_low) + (2 * (1 << r) + 1) ** d
    if size > budget:
        raise CapExceeded(f"F_{V}: {size} candidate pairs exceed the budget of {budget}")
    a = lattice.ball_offsets(d, R_low)
    side = np.arange(-(1 << r), (1 << r) + 1)
    box = np.stack(np.meshgrid(*([side] * d), indexing="ij"), axis=-1).reshape(-1, d)
    box = box[np.abs(box).sum(axis=1) <= R_top]
    out = np.unique(np.concatenate([a, box]), axis=0)
    return out[np.abs(out).sum(axis=1) > 0]


def _fv_search(V: int, d: int, r: int, budget: int, listing: bool):
    if V < 1:
        return
    origin = (0,) * d
    for k, R in _size_bounds(V, r):
        if k == 1:
            if V == 1:
                yield [frozenset([origin])] if listing else 1
            continue
        if k == 2:
            ys = _pair_candidates(V, d, r, budget)
            hit = ys[_pair_volume(ys, r) == V]
            yield [frozenset([origin, tuple(y)]) for y in hit.tolist()] if listing else len(hit)
            continue
        n_ball = lattice.ball_count(d, R) - 1
        work = math.comb(n_ball, k - 1)
        if work > budget:
            raise CapExceeded(f"F_{V}: {work} candidate sets with {k} points exceed the budget of {budget}")
        ball = lattice.ball_offsets(d, R)
        ball = ball[np.abs(ball).sum(axis=1) > 0]
        if k == 3:
            for i in range(len(ball) - 1):
                Z = ball[i + 1 :]
                ok = _triple_volume(ball[i], Z, r) == V
                if ok.any():
                    if listing:
                        yi = tuple(ball[i].tolist())
                        yield [frozenset([origin, yi, tuple(z)]) for z in Z[ok].tolist()]
                    else:
                        yield int(ok.sum())
        else:
            hits = []
            for combo in itertools.combinations(map(tuple, ball.tolist()), k - 1):
                s = frozenset((origin,) + combo)
                if lattice.diameter(s) <= R and total_volume(s, r) == V:
                    hits.append(s)
            yield hits if listing else len(hits)


def count_FV_bruteforce(V: int, d: int, r: int) -> int:
    """Generic oracle: every candidate set through total_volume."""
    origin = (0,) * d
    count = 1 if V == 1 else 0
    for k, R in _size_bounds(V, r):
        if k == 1:
            continue
        ball = [tuple(y) for y in lattice.ball_offsets(d, R).tolist() if any(y)]
        for combo in itertools.combinations(ball, k - 1):
            s = frozenset((origin,) + combo)
            if total_volume(s, r) == V:
                count += 1
    return count


# --------------------------------------------------------------- C_0(m)


def single_contour_regime(w: int, d: int, cp: ContourParams) -> bool:
    """Every incorrect set of the box with halo is one part at scale 0."""
    return cp.M * d**cp.a >= 2 * d * (w + 1)


@lru_cache(maxsize=16)
def _sweep(m_max: int, w: int, d: int) -> dict:
    """All incorrect sets of size <= m_max produced by spins on [-w, w]^d
    with a minus exterior, keyed by size.

    Cells are filled in lexicographic order. A point becomes incorrect as
    soon as its closed unit ball holds both signs, and stays so, which gives
    the pruning bound.
    """
    side = 2 * w + 1
    ext = side + 2  # tracked points: box plus one layer
    shape = (ext,) * d
    strides = np.cumprod((1,) + shape[::-1][:-1])[::-1]
    offs = [0] + [int(s) * e for s in strides for e in (1, -1)]

    def lin(p):
        return int(sum((c + w + 1) * s for c, s in zip(p, strides)))

    n_pts = ext**d
    plus = [0] * n_pts
    minus = [0] * n_pts
    # exterior cells are minus; count them in every tracked ball
    tracked = list(itertools.product(range(-w - 1, w + 2), repeat=d))
    in_box = lambda p: all(-w <= c <= w for c in p)  # noqa: E731
    for p in tracked:
        for q in lattice.neighbors(p) + [p]:
            if not in_box(q):
                minus[lin(p)] += 1
    cells = [lin(p) for p in itertools.product(range(-w, w + 1), repeat=d)]
    coords = {lin(p): p for p in tracked}
    bad = [plus[i] > 0 and minus[i] > 0 for i in range(n_pts)]
    state = {"bad": sum(bad)}
    found: dict = {}

    def assign(c, sign, delta):
        arr = plus if sign > 0 else minus
        for o in offs:
            j = c + o
            before = plus[j] > 0 and minus[j] > 0
            arr[j] += delta
            after = plus[j] > 0 and minus[j] > 0
            state["bad"] += after - before

    def rec(i):
        if state["bad"] > m_max:
            return
        if i == len(cells):
            if state["bad"] == 0:
                return
            S = frozenset(coords[j] for j in range(n_pts) if plus[j] > 0 and minus[j] > 0)
            found.setdefault(len(S), set()).add(S)
            return
        c = cells[i]
        for sign in (-1, 1):
            assign(c, sign, 1)
            rec(i + 1)
            assign(c, sign, -1)

    rec(0)
    return {m: sorted(v, key=sorted) for m, v in found.items()}


def enumerate_contours_C0(m: int, box_half_width: int, cp: ContourParams, d: int = 2, m_cap: int = 6) -> list:
    """Supports of size m, containing the origin in their volume, among contours
    of minus-boundary configurations on [-w, w]^d."""
    if m > m_cap:
        raise CapExceeded(f"m = {m} exceeds the exhaustive-sweep cap of {m_cap}")
    if not single_contour_regime(box_half_width, d, cp):
        raise CapExceeded("box too large for the single-contour regime at this M; lower the box or raise M")
    origin = (0,) * d
    out = []
    for S in _sweep(m, box_half_width, d).get(m, []):
        V, _ = lattice.volume_and_interior(S)
        if origin in V:
            out.append(S)
    return out


# --------------------------------------------------------------- constants


@dataclass(frozen=True)
class EntropyConstants:
    a: float
    r: int
    M: float
    c: float
    b: float
    kappa: float
    c1: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a", "r", "M", "c", "b", "kappa", "c1")}


def entropy_constants(d: int, cp: ContourParams) -> EntropyConstants:
    c = constants.entropy_c(d, cp.r)
    b = constants.entropy_b(d, cp.r)
    kap = constants.kappa(d, cp.a, cp.r, cp.M)
    return EntropyConstants(cp.a, cp.r, cp.M, c, b, kap, constants.entropy_c1(d, b, kap))


def check_kappa(g: Contour | frozenset, cp: ContourParams, d: int | None = None) -> bool:
    sp = g.support if isinstance(g, Contour) else frozenset(g)
    d = d or lattice.dim_of(sp)
    kap = constants.kappa(d, cp.a, cp.r, cp.M)
    return total_volume(sp, cp.r) <= kap * len(sp)
