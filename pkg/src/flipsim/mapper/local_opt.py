"""Estimator-guided pairwise swaps between mesh-neighbour PEs."""

from __future__ import annotations

import numpy as np

from ..arch import ArchConfig
from ..graph import Graph
from .estimator import EstimatorParams, SwapEvaluator
from .mapping import Mapping

IDLE_FACTOR = 4
CAP_FACTOR = 200


def local_optimize(g: Graph, m: Mapping, cfg: ArchConfig, p: EstimatorParams | None = None,
                   seed: int = 0) -> tuple[Mapping, int]:
    """Improve ``m`` by swaps with positive estimated benefit.

    Each iteration draws a random PE replica, pairs each of its vertices (or a
    free slot) with each vertex (or free slot) of its mesh neighbours in the
    same replica, and performs the best exchange if it saves cycles. Stops after
    ``IDLE_FACTOR * |P|`` consecutive iterations without a swap, or at
    ``CAP_FACTOR * |P|`` iterations, where |P| counts PE replicas.

    Returns the new mapping and the number of accepted swaps.
    """
    p = p or EstimatorParams()
    n = g.num_vertices
    if n == 0:
        return m, 0
    w, h, s = cfg.array_width, cfg.array_height, m.num_slices
    num_pe = w * h * s
    ev = SwapEvaluator(g, m.locations(), cfg, p)
    members: dict[tuple[int, int, int], list[int]] = {}
    for v, key in enumerate(ev.pos):
        members.setdefault(key, []).append(v)
    cap = cfg.drf_capacity
    rng = np.random.default_rng(seed)

    def slots(key):
        vs = members.get(key, [])
        return vs + [None] if len(vs) < cap else vs

    idle = 0
    swaps = 0
    for _ in range(CAP_FACTOR * num_pe):
        if idle >= IDLE_FACTOR * num_pe:
            break
        r = int(rng.integers(num_pe))
        x, y, sl = r % w, (r // w) % h, r // (w * h)
        here = (x, y, sl)
        best = 0
        best_pair = None
        for nx, ny in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            there = (nx, ny, sl)
            for a in slots(here):
                for b in slots(there):
                    if a is None and b is None:
                        continue
                    now, after = ev.evaluate(a, b, here, there)
                    if now - after > best:
                        best = now - after
                        best_pair = (a, b, there)
        if best_pair is None:
            idle += 1
            continue
        a, b, there = best_pair
        for v, src, dst in ((a, here, there), (b, there, here)):
            if v is not None:
                members[src].remove(v)
                if not members[src]:
                    del members[src]
                members.setdefault(dst, []).append(v)
                ev.move(v, dst)
        swaps += 1
        idle = 0

    locs = [ev.pos[v] for v in range(n)]
    return Mapping.from_locations(locs, m.num_slices, cfg), swaps
