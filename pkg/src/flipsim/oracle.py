"""Reference answers computed without the kernel or simulator code paths."""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field

from .arch import ArchConfig
from .errors import CapacityError
from .graph import Graph

UNREACHED = 2**31 - 1
MAX_EXHAUSTIVE_VERTICES = 6
MAX_EXHAUSTIVE_PES = 4


@dataclass
class OracleResult:
    attributes: list[int]
    meta: dict = field(default_factory=dict)


def _out_lists(g: Graph) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.num_vertices)]
    for u, v, w in g.edges:
        adj[u].append((v, w))
        if not g.directed:
            adj[v].append((u, w))
    return adj


def bfs_levels(g: Graph, source: int) -> OracleResult:
    adj = _out_lists(g)
    level = [UNREACHED] * g.num_vertices
    level[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v, _ in adj[u]:
            if level[v] == UNREACHED:
                level[v] = level[u] + 1
                q.append(v)
    return OracleResult(level, {"reached": sum(x != UNREACHED for x in level)})


def sssp_distances(g: Graph, source: int) -> OracleResult:
    """Dijkstra with a binary heap."""
    adj = _out_lists(g)
    dist = [UNREACHED] * g.num_vertices
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return OracleResult(dist, {"reached": sum(x != UNREACHED for x in dist)})


def bellman_ford(g: Graph, source: int) -> list[int]:
    """Independent cross-check for sssp_distances: |V|-1 rounds of full relaxation."""
    n = g.num_vertices
    arcs = [(u, v, w) for u, v, w in g.edges]
    if not g.directed:
        arcs += [(v, u, w) for u, v, w in g.edges]
    dist = [math.inf] * n
    dist[source] = 0
    for _ in range(max(0, n - 1)):
        changed = False
        for u, v, w in arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return [UNREACHED if d == math.inf else int(d) for d in dist]


def wcc_labels(g: Graph) -> OracleResult:
    """Minimum vertex id of each weakly-connected component, by flood fill."""
    n = g.num_vertices
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v, _ in g.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    label = [-1] * n
    count = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        count += 1
        label[s] = s
        stack = [s]
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if label[v] < 0:
                    label[v] = s
                    stack.append(v)
    return OracleResult(label, {"components": count})


def union_find_labels(g: Graph) -> list[int]:
    """Independent cross-check for wcc_labels."""
    parent = list(range(g.num_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in g.edges:
        a, b = find(u), find(v)
        if a != b:
            parent[max(a, b)] = min(a, b)
    return [find(v) for v in range(g.num_vertices)]


def exhaustive_best_mapping(g: Graph, cfg: ArchConfig) -> int:
    """Minimum total routing length over every capacity-respecting placement."""
    n = g.num_vertices
    pes = [(x, y) for y in range(cfg.array_height) for x in range(cfg.array_width)]
    if n > MAX_EXHAUSTIVE_VERTICES or len(pes) > MAX_EXHAUSTIVE_PES:
        raise CapacityError(f"exhaustive search limited to {MAX_EXHAUSTIVE_VERTICES} vertices "
                            f"and {MAX_EXHAUSTIVE_PES} PEs")
    per_pe = cfg.drf_capacity * max(1, math.ceil(n / (len(pes) * cfg.drf_capacity)))
    arcs = [(u, v) for u, v, _ in g.edges]
    if not g.directed:
        arcs += [(v, u) for u, v in arcs]
    best = None
    for assign in itertools.product(range(len(pes)), repeat=n):
        if any(assign.count(p) > per_pe for p in set(assign)):
            continue
        cost = 0
        for u, v in arcs:
            a, b = pes[assign[u]], pes[assign[v]]
            cost += abs(a[0] - b[0]) + abs(a[1] - b[1])
        if best is None or cost < best:
            best = cost
    return 0 if best is None else best
