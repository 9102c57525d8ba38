"""Graph representation, edge-list I/O and structural queries.

Vertex ids are dense integers in ``[0, num_vertices)``. Undirected graphs store
each edge once (``src < dst``) and expand it to two directed arcs on query.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import GraphError, GraphFormatError

Edge = tuple[int, int, int]


@dataclass(frozen=True)
class Graph:
    directed: bool
    num_vertices: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        n = self.num_vertices
        if n < 0:
            raise GraphError("negative vertex count")
        seen: set[tuple[int, int]] = set()
        for u, v, w in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) has id out of range [0,{n})")
            if u == v:
                raise GraphError(f"self-loop on vertex {u}")
            if w < 1:
                raise GraphError(f"edge ({u},{v}) has weight {w} < 1")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def from_edges(cls, directed: bool, num_vertices: int, edges: Iterable[Sequence[int]]) -> Graph:
        """Build a graph, normalising undirected edges to ``src < dst`` and sorting."""
        norm = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = int(e[2]) if len(e) > 2 else 1
            if not directed and u > v:
                u, v = v, u
            norm.append((u, v, w))
        norm.sort()
        return cls(directed, num_vertices, tuple(norm))

    # -- arc views -----------------------------------------------------------

    @cached_property
    def arcs(self) -> tuple[Edge, ...]:
        """Directed arcs, sorted by (src, dst)."""
        if self.directed:
            return self.edges
        out = [(u, v, w) for u, v, w in self.edges] + [(v, u, w) for u, v, w in self.edges]
        out.sort()
        return tuple(out)

    @property
    def num_arcs(self) -> int:
        return len(self.edges) if self.directed else 2 * len(self.edges)

    @cached_property
    def out_adj(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """``out_adj[u]`` = ((v, w), ...) in ascending v."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vertices)]
        for u, v, w in self.arcs:
            adj[u].append((v, w))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def in_adj(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """``in_adj[v]`` = ((u, w), ...) in ascending u."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vertices)]
        for u, v, w in self.arcs:
            adj[v].append((u, w))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Undirected neighbourhood (union of in- and out-neighbours), sorted."""
        nb: list[set[int]] = [set() for _ in range(self.num_vertices)]
        for u, v, _ in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(tuple(sorted(s)) for s in nb)

    def degrees(self) -> list[tuple[int, int]]:
        """Per-vertex (in-degree, out-degree) over directed arcs."""
        deg_in = [0] * self.num_vertices
        deg_out = [0] * self.num_vertices
        for u, v, _ in self.arcs:
            deg_out[u] += 1
            deg_in[v] += 1
        return list(zip(deg_in, deg_out))

    def symmetrized(self) -> Graph:
        """Directed graph holding every arc in both directions.

        Used by kernels that propagate along the undirected view (WCC). When both
        u->v and v->u already exist, their own weights are kept.
        """
        if not self.directed:
            return Graph(True, self.num_vertices, self.arcs)
        arcs = {(u, v): w for u, v, w in self.edges}
        for u, v, w in self.edges:
            arcs.setdefault((v, u), w)
        return Graph(True, self.num_vertices, tuple(sorted((u, v, w) for (u, v), w in arcs.items())))

    # -- structure -----------------------------------------------------------

    def _undirected_csr(self) -> csr_matrix:
        n = self.num_vertices
        if not self.edges:
            return csr_matrix((n, n), dtype=np.int8)
        e = np.asarray(self.edges, dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))

    def weak_components(self) -> list[list[int]]:
        """Weakly-connected components, largest first (ties: smallest member id)."""
        if self.num_vertices == 0:
            return []
        _, labels = connected_components(self._undirected_csr(), directed=False)
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels.tolist()):
            groups.setdefault(lab, []).append(v)
        return sorted(groups.values(), key=lambda c: (-len(c), c[0]))

    def is_weakly_connected(self) -> bool:
        return self.num_vertices > 0 and len(self.weak_components()) == 1


def graph_center(g: Graph, component: Sequence[int] | None = None) -> int:
    """Vertex of minimum eccentricity (unweighted hops, undirected view).

    Operates on ``component`` if given, else on the largest weakly-connected
    component. Ties go to the lowest id.
    """
    if g.num_vertices == 0:
        raise GraphError("graph_center of an empty graph")
    comp = sorted(component) if component is not None else g.weak_components()[0]
    if len(comp) == 1:
        return comp[0]
    adj = g._undirected_csr()
    idx = np.asarray(comp)
    sub = adj[idx][:, idx]
    best_v, best_ecc = -1, np.inf
    chunk = max(1, 4_000_000 // len(comp))
    for lo in range(0, len(comp), chunk):
        d = shortest_path(sub, method="D", unweighted=True, directed=False,
                          indices=np.arange(lo, min(lo + chunk, len(comp))))
        ecc = d.max(axis=1)
        i = int(np.argmin(ecc))
        if ecc[i] < best_ecc:
            best_ecc, best_v = ecc[i], comp[lo + i]
    return best_v


# -- edge-list files ---------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    directed: bool | None = None
    n = 0
    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if directed is None:
            if len(parts) != 2 or parts[0] not in ("directed", "undirected"):
                raise GraphFormatError("expected header '<directed|undirected> <num_vertices>'", lineno)
            directed = parts[0] == "directed"
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"bad vertex count {parts[1]!r}", lineno) from None
            if n < 0:
                raise GraphFormatError("negative vertex count", lineno)
            continue
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected '<src> <dst> <weight>', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = int(parts[2]) if len(parts) == 3 else 1
        except ValueError:
            raise GraphFormatError(f"non-integer field in {line!r}", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range [0,{n}) in {line!r}", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on vertex {u}", lineno)
        if w < 1:
            raise GraphFormatError(f"weight must be >= 1, got {w}", lineno)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append((u, v, w))
    if directed is None:
        raise GraphFormatError("missing header")
    return Graph.from_edges(directed, n, edges)


def load_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph) -> str:
    lines = [f"{'directed' if g.directed else 'undirected'} {g.num_vertices}"]
    lines.extend(f"{u} {v} {w}" for u, v, w in sorted(g.edges))
    return "\n".join(lines) + "\n"


def save_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))
