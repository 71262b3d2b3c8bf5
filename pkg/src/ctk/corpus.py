"""Seeded random instances shared by tests, scripts and the acceptance run."""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from . import lattice
from .model import SpinConfiguration


def rng_of(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_configuration(rng, L: int, d: int = 2, density: float = 0.2, boundary: int = -1) -> SpinConfiguration:
    """Box window with iid spins, +1 with probability `density` (flipped for plus boundary)."""
    rng = rng_of(rng)
    fill = rng.random(L**d) < density
    vals = np.where(fill, -boundary, boundary).astype(np.int8)
    return SpinConfiguration.box(L, d, boundary).with_values(vals)


def random_blobs(rng, L: int, d: int = 2, n_blobs: int = 3, max_radius: int = 3) -> SpinConfiguration:
    """Minus box with a few plus l1-balls, some with minus holes; gives nested contours."""
    rng = rng_of(rng)
    base = SpinConfiguration.box(L, d, -1)
    pts = base.points()
    vals = base.values().copy()
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    for _ in range(n_blobs):
        c = rng.integers(lo, hi + 1)
        R = int(rng.integers(1, max_radius + 1))
        dist = np.abs(pts - c).sum(axis=1)
        vals[dist <= R] = 1
        if R >= 3 and rng.random() < 0.5:
            vals[dist <= R - 2] = -1
    return base.with_values(vals)


def random_connected_region(rng, size: int, d: int = 2, spread: float = 0.0) -> frozenset:
    """Grow a connected region from the origin by adding random neighbours of the frontier.

    spread in [0, 1) biases growth toward the most recent point (snake-like) instead
    of the whole region (blob-like).
    """
    rng = rng_of(rng)
    origin = (0,) * d
    reg = [origin]
    seen = {origin}
    while len(reg) < size:
        if spread and rng.random() < spread:
            base = reg[-1]
        else:
            base = reg[int(rng.integers(len(reg)))]
        nb = lattice.neighbors(base)
        q = nb[int(rng.integers(len(nb)))]
        if q not in seen:
            seen.add(q)
            reg.append(q)
    return frozenset(reg)


def random_region(rng, max_size: int = 60, d: int = 2) -> frozenset:
    rng = rng_of(rng)
    return random_connected_region(rng, int(rng.integers(1, max_size + 1)), d, float(rng.choice([0.0, 0.5, 0.9])))


def random_tree(rng, n: int) -> nx.Graph:
    rng = rng_of(rng)
    if n == 1:
        g = nx.Graph()
        g.add_node(0)
        return g
    # Pruefer sequences give uniform labelled trees
    seq = rng.integers(0, n, size=n - 2).tolist() if n > 2 else []
    return nx.from_prufer_sequence(seq) if n > 2 else nx.path_graph(2)


def random_connected_graph(rng, n: int, extra: float = 0.3) -> nx.Graph:
    """Random tree plus about extra * n further random edges."""
    rng = rng_of(rng)
    g = random_tree(rng, n)
    for _ in range(int(extra * n)):
        u, v = rng.integers(0, n, size=2).tolist()
        if u != v:
            g.add_edge(u, v)
    return g


@dataclass(frozen=True)
class CorpusItem:
    index: int
    L: int
    density: float
    kind: str
    sigma: SpinConfiguration


def configuration_corpus(n: int, seed: int = 2024, d: int = 2, sizes=(4, 24), densities=(0.05, 0.2, 0.5)) -> list:
    """n configurations cycling densities, mixing iid fills with nested blobs."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        L = int(rng.integers(sizes[0], sizes[1] + 1))
        dens = densities[i % len(densities)]
        if i % 5 == 4:
            sig = random_blobs(rng, L, d, n_blobs=int(rng.integers(1, 4)), max_radius=max(1, L // 4))
            kind = "blobs"
        else:
            sig = random_configuration(rng, L, d, dens)
            kind = "iid"
        out.append(CorpusItem(i, L, dens, kind, sig))
    return out
