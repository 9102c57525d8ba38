"""Vertex programs in apply/scatter form with per-invocation cycle costs.

All three kernels propagate a minimum: an incoming message can only lower a
vertex attribute, which guarantees the asynchronous execution terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import ConfigError
from .graph import Graph

INF = 2**31 - 1


def sat_add(a: int, b: int) -> int:
    s = a + b
    return INF if s >= INF else s


class KernelName(str, Enum):
    BFS = "bfs"
    SSSP = "sssp"
    WCC = "wcc"


class ApplyResult(NamedTuple):
    attribute: int
    updated: bool
    cost: int


@dataclass(frozen=True)
class KernelSpec:
    name: KernelName
    cycles_update: int
    cycles_no_update: int

    @property
    def needs_source(self) -> bool:
        return self.name is not KernelName.WCC

    @property
    def symmetric(self) -> bool:
        """WCC labels travel both ways along every arc."""
        return self.name is KernelName.WCC

    def candidate(self, msg: int, weight: int) -> int:
        if self.name is KernelName.BFS:
            return sat_add(msg, 1)
        if self.name is KernelName.SSSP:
            return sat_add(msg, weight)
        return msg

    def apply(self, current: int, msg: int, weight: int) -> ApplyResult:
        cand = self.candidate(msg, weight)
        if cand < current:
            return ApplyResult(cand, True, self.cycles_update)
        return ApplyResult(current, False, self.cycles_no_update)

    def initial_attributes(self, n: int, source: int | None) -> list[int]:
        if self.name is KernelName.WCC:
            return list(range(n))
        if source is None or not 0 <= source < n:
            raise ConfigError(f"{self.name.value} needs a source in [0,{n}), got {source}")
        attrs = [INF] * n
        attrs[source] = 0
        return attrs


BFS = KernelSpec(KernelName.BFS, 5, 4)
SSSP = KernelSpec(KernelName.SSSP, 5, 4)
WCC = KernelSpec(KernelName.WCC, 4, 2)
KERNELS = {k.name.value: k for k in (BFS, SSSP, WCC)}


def get_kernel(name: str) -> KernelSpec:
    try:
        return KERNELS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def source_init(k: KernelSpec, g: Graph, source: int | None = None,
                wcc_seed_mode: str = "all") -> tuple[list[int], list[int]]:
    """Initial attributes and the vertices whose scatter starts the run.

    ``wcc_seed_mode`` is ``"all"`` (every vertex announces its own id) or
    ``"local-min"`` (only vertices whose id is smaller than every neighbour's).
    Both reach the same fixed point.
    """
    n = g.num_vertices
    attrs = k.initial_attributes(n, source)
    if k.name is not KernelName.WCC:
        return attrs, [source]
    if wcc_seed_mode == "all":
        return attrs, list(range(n))
    if wcc_seed_mode == "local-min":
        return attrs, [v for v in range(n) if all(v < w for w in g.neighbors[v])]
    raise ConfigError(f"unknown wcc seed mode {wcc_seed_mode!r}")


def relax_to_fixpoint(k: KernelSpec, g: Graph, source: int | None = None) -> list[int]:
    """Sweep apply over every arc until nothing changes (reference semantics, not a timing model)."""
    arcs = g.symmetrized().arcs if k.symmetric else g.arcs
    attrs = k.initial_attributes(g.num_vertices, source)
    changed = True
    while changed:
        changed = False
        for u, v, w in arcs:
            if attrs[u] >= INF:
                continue
            r = k.apply(attrs[v], attrs[u], w)
            if r.updated:
                attrs[v] = r.attribute
                changed = True
    return attrs
