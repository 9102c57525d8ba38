"""Seeded generators for the evaluation graph families.

Road-network families are synthesised: a square grid loses each edge with
probability 0.25, a BFS ball of the requested size is cut out of it, and chords
or removals bring the arc count into the family's range. Arc counts of the
undirected families are in directed arcs (two per undirected edge).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InfeasibleParameters
from .graph import Graph

MAX_ATTEMPTS = 64
MAX_RANDOM_WEIGHT = 15


class FamilyKind(str, Enum):
    TREE = "tree"
    SRN = "srn"
    LRN = "lrn"
    SYN = "syn"
    EXT_LRN = "ext_lrn"


# kind -> (directed, |V| range, arcs-per-vertex range or fixed arc count)
_TABLE = {
    FamilyKind.TREE: dict(directed=True, v=(256, 256)),
    FamilyKind.SRN: dict(directed=False, v=(64, 107), arcs=(146, 278)),
    FamilyKind.LRN: dict(directed=False, v=(256, 256), arcs=(584, 898)),
    FamilyKind.SYN: dict(directed=True, v=(256, 256)),
    FamilyKind.EXT_LRN: dict(directed=False, v=(16000, 16000), arcs=(44000, 50000)),
}

_KIND_CODE = {k: i for i, k in enumerate(FamilyKind)}
ROAD_ARC_RATIO = (584 / 256, 898 / 256)


@dataclass(frozen=True)
class GraphFamily:
    """A graph family plus optional size override.

    ``num_vertices=None`` draws the size from the family's table range. With an
    override, road-network arc ranges are scaled by the same arcs/vertex ratio.
    """

    kind: FamilyKind
    num_vertices: int | None = None
    weighted: bool = False

    @classmethod
    def parse(cls, name: str, num_vertices: int | None = None, weighted: bool = False) -> GraphFamily:
        return cls(FamilyKind(name.lower().replace("-", "_").replace(".", "")), num_vertices, weighted)

    @property
    def directed(self) -> bool:
        return _TABLE[self.kind]["directed"]

    def vertex_range(self) -> tuple[int, int]:
        if self.num_vertices is not None:
            return self.num_vertices, self.num_vertices
        return _TABLE[self.kind]["v"]

    def arc_range(self, n: int) -> tuple[int, int]:
        if self.kind is FamilyKind.TREE:
            return n - 1, n - 1
        if self.kind is FamilyKind.SYN:
            return 3 * n, 3 * n
        lo, hi = _TABLE[self.kind]["arcs"]
        if self.num_vertices is None:
            return lo, hi
        # size override: keep the large-road-network arcs/vertex band
        return math.ceil(ROAD_ARC_RATIO[0] * n), math.floor(ROAD_ARC_RATIO[1] * n)


def _rng(family: GraphFamily, seed: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, attempt, _KIND_CODE[family.kind]]))


def generate(family: GraphFamily, seed: int) -> Graph:
    """Deterministic instance of ``family`` for ``seed``.

    Disconnected draws are rejected and retried with the next derived seed.
    """
    vlo, vhi = family.vertex_range()
    if vlo < 1:
        raise InfeasibleParameters("family needs at least one vertex")
    for attempt in range(MAX_ATTEMPTS):
        rng = _rng(family, seed, attempt)
        n = int(rng.integers(vlo, vhi + 1))
        if family.kind is FamilyKind.TREE:
            edges = _recursive_tree(n, rng)
        elif family.kind is FamilyKind.SYN:
            edges = _random_digraph(n, 3 * n, rng)
        else:
            edges = _road_network(n, *family.arc_range(n), rng)
        if edges is None:
            continue
        if family.weighted:
            w = rng.integers(1, MAX_RANDOM_WEIGHT + 1, size=len(edges))
            edges = [(u, v, int(x)) for (u, v, _), x in zip(edges, w)]
        g = Graph.from_edges(family.directed, n, edges)
        if g.is_weakly_connected():
            return g
    raise InfeasibleParameters(f"no connected {family.kind.value} instance after {MAX_ATTEMPTS} attempts")


def _recursive_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int, int]]:
    # vertex i attaches to a uniform parent among 0..i-1; arcs point away from root 0
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    return [(p, i, 1) for i, p in enumerate(parents, start=1)]


def _random_digraph(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int, int]] | None:
    if m > n * (n - 1):
        raise InfeasibleParameters(f"{m} arcs exceed the simple-digraph maximum for {n} vertices")
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < m:
        need = m - len(chosen)
        u = rng.integers(0, n, size=2 * need)
        v = rng.integers(0, n, size=2 * need)
        for a, b in zip(u.tolist(), v.tolist()):
            if a != b and (a, b) not in chosen:
                chosen.add((a, b))
                if len(chosen) == m:
                    break
    return [(a, b, 1) for a, b in chosen]


def _road_network(n: int, arc_lo: int, arc_hi: int, rng: np.random.Generator) -> list[tuple[int, int, int]] | None:
    if arc_lo > arc_hi:
        raise InfeasibleParameters(f"empty arc range [{arc_lo},{arc_hi}] for {n} vertices")
    if arc_hi < 2 * (n - 1):
        raise InfeasibleParameters(f"{arc_hi} arcs cannot connect {n} vertices")
    side = int(math.ceil(math.sqrt(n) * 1.8)) + 2
    keep_h = rng.random((side, side - 1)) >= 0.25
    keep_v = rng.random((side - 1, side)) >= 0.25

    def grid_nbrs(r: int, c: int):
        if c + 1 < side and keep_h[r, c]:
            yield r, c + 1
        if c > 0 and keep_h[r, c - 1]:
            yield r, c - 1
        if r + 1 < side and keep_v[r, c]:
            yield r + 1, c
        if r > 0 and keep_v[r - 1, c]:
            yield r - 1, c

    mid = side // 2
    start = (mid + int(rng.integers(-2, 3)), mid + int(rng.integers(-2, 3)))
    order = [start]
    seen = {start}
    q = deque([start])
    while q and len(order) < n:
        cell = q.popleft()
        for nb in grid_nbrs(*cell):
            if nb not in seen:
                seen.add(nb)
                order.append(nb)
                q.append(nb)
                if len(order) == n:
                    break
    if len(order) < n:
        return None

    # relabel row-major so ids carry spatial coherence, as in a road-network dump
    cells = sorted(order)
    vid = {cell: i for i, cell in enumerate(cells)}
    edges: set[tuple[int, int]] = set()
    for cell in cells:
        for nb in grid_nbrs(*cell):
            if nb in vid:
                a, b = vid[cell], vid[nb]
                edges.add((min(a, b), max(a, b)))

    target = int(rng.integers(arc_lo, arc_hi + 1))
    if 2 * len(edges) < arc_lo:
        chords = []
        for (r, c) in cells:
            for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                nb = (r + dr, c + dc)
                if nb in vid:
                    a, b = vid[(r, c)], vid[nb]
                    key = (min(a, b), max(a, b))
                    if key not in edges:
                        chords.append(key)
        rng.shuffle(chords)
        while 2 * len(edges) < target and chords:
            edges.add(tuple(chords.pop()))
        if 2 * len(edges) < arc_lo:
            return None
    elif 2 * len(edges) > arc_hi:
        edge_list = sorted(edges)
        rng.shuffle(edge_list)
        adj: dict[int, set[int]] = {i: set() for i in range(n)}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        for a, b in edge_list:
            if 2 * len(edges) <= target:
                break
            adj[a].discard(b)
            adj[b].discard(a)
            if _reachable(adj, a, b):
                edges.discard((a, b))
            else:
                adj[a].add(b)
                adj[b].add(a)
        if 2 * len(edges) > arc_hi:
            return None
    return [(a, b, 1) for a, b in sorted(edges)]


def _reachable(adj: dict[int, set[int]], src: int, dst: int) -> bool:
    seen = {src}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            return True
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                q.append(v)
    return False
