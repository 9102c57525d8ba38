"""Per-arc runtime estimate used to rank local swaps.

Each arc u->v costs its transfer time (hops x t_h, plus ``epsilon`` if the two
ends share a cluster but live in different slices) plus table search and
vertex program time. An arc into a collision set pays the sequential
worst case instead: the destination is assumed to be processed last.
"""

from __future__ import annotations

from dataclasses import dataclass
from ..arch import ArchConfig
from ..graph import Graph
from .mapping import Mapping

Key = tuple[int, int, int]


@dataclass(frozen=True)
class EstimatorParams:
    t_h: int = 4
    t_tab: int = 2
    t_exe: int = 5
    epsilon: int = 100

    def __post_init__(self):
        if min(self.t_h, self.t_tab, self.t_exe, self.epsilon) < 0:
            raise ValueError("estimator parameters must be >= 0")


def congested_arc_time(t_trans: int, set_size: int, p: EstimatorParams) -> int:
    """Worst case for one arc of a collision set: wait for every co-located sibling."""
    return t_trans + set_size * (p.t_tab + p.t_exe)


def arc_time(hops: int, cross_slice: bool, set_size: int, p: EstimatorParams) -> int:
    t_trans = hops * p.t_h + (p.epsilon if cross_slice else 0)
    if set_size >= 2:
        return congested_arc_time(t_trans, set_size, p)
    return t_trans + p.t_tab + p.t_exe


class SwapEvaluator:
    """Mutable placement with incremental collision counts.

    ``succ_at[a][key]`` counts successors of ``a`` placed on PE/slice ``key``,
    which is the collision-set size seen by every arc a->v with v on ``key``.
    """

    def __init__(self, g: Graph, locs: list[Key], cfg: ArchConfig, p: EstimatorParams):
        self.g = g
        self.p = p
        self.cd = cfg.cluster_dim
        self.pos = list(locs)
        n = g.num_vertices
        self.succ = [frozenset(v for v, _ in g.out_adj[u]) for u in range(n)]
        self.outs = [tuple(v for v, _ in g.out_adj[u]) for u in range(n)]
        self.ins = [tuple(u for u, _ in g.in_adj[v]) for v in range(n)]
        self.succ_at: list[dict[Key, int]] = []
        for u in range(n):
            d: dict[Key, int] = {}
            for v in self.outs[u]:
                k = self.pos[v]
                d[k] = d.get(k, 0) + 1
            self.succ_at.append(d)
        self._cache: dict[int, int] = {}

    def _cost(self, u: int | None, v: int | None, swap: dict[int, Key] | None, moved: tuple) -> int:
        """Sum of arc estimates over arcs touching u or v.

        ``swap`` overrides the position of moved vertices and ``moved`` lists
        (vertex, old key, new key) for the hypothetical exchange; both are empty
        for the current placement.
        """
        p = self.p
        th, tail, eps, cd = p.t_h, p.t_tab + p.t_exe, p.epsilon, self.cd
        step = p.t_tab + p.t_exe
        succ_at, succ, pos = self.succ_at, self.succ, self.pos
        total = 0
        for x in (u, v):
            if x is None:
                continue
            px = swap[x] if swap and x in swap else pos[x]
            other = u if x == v else None
            for b in self.outs[x]:
                if b == other:
                    continue
                pb = swap[b] if swap and b in swap else pos[b]
                size = succ_at[x].get(pb, 0)
                for w, old, new in moved:
                    if w in succ[x]:
                        size += (new == pb) - (old == pb)
                t = (abs(px[0] - pb[0]) + abs(px[1] - pb[1])) * th
                if px[2] != pb[2] and px[0] // cd == pb[0] // cd and px[1] // cd == pb[1] // cd:
                    t += eps
                total += t + size * step if size >= 2 else t + tail
            for a in self.ins[x]:
                if a == other:
                    continue
                pa = swap[a] if swap and a in swap else pos[a]
                size = succ_at[a].get(px, 0)
                for w, old, new in moved:
                    if w in succ[a]:
                        size += (new == px) - (old == px)
                t = (abs(pa[0] - px[0]) + abs(pa[1] - px[1])) * th
                if pa[2] != px[2] and pa[0] // cd == px[0] // cd and pa[1] // cd == px[1] // cd:
                    t += eps
                total += t + size * step if size >= 2 else t + tail
        return total

    def evaluate(self, u: int | None, v: int | None, pu: Key, pv: Key) -> tuple[int, int]:
        """(cost now, cost after exchanging the contents of PE/slices pu and pv).

        ``u`` sits on ``pu`` and ``v`` on ``pv``; either may be None for a free slot.
        """
        now = self._now(u) + self._now(v)
        if u is not None and v is not None and (v in self.succ[u] or u in self.succ[v]):
            now = self._cost(u, v, None, ())
        moved = []
        swap = {}
        if u is not None:
            moved.append((u, pu, pv))
            swap[u] = pv
        if v is not None:
            moved.append((v, pv, pu))
            swap[v] = pu
        return now, self._cost(u, v, swap, tuple(moved))

    def _now(self, x: int | None) -> int:
        if x is None:
            return 0
        c = self._cache.get(x)
        if c is None:
            c = self._cache[x] = self._cost(x, None, None, ())
        return c

    def move(self, x: int, new: Key) -> None:
        self._cache.clear()
        old = self.pos[x]
        for a in self.ins[x]:
            d = self.succ_at[a]
            d[old] -= 1
            if not d[old]:
                del d[old]
            d[new] = d.get(new, 0) + 1
        self.pos[x] = new


def estimate_partial_runtime(g: Graph, m: Mapping, u: int, v: int, p: EstimatorParams,
                             cfg: ArchConfig) -> tuple[int, int]:
    """Estimated cycles over arcs touching u or v, before and after swapping their PEs."""
    ev = SwapEvaluator(g, m.locations(), cfg, p)
    return ev.evaluate(u, v, ev.pos[u], ev.pos[v])
