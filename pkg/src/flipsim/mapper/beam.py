"""Initial placement by beam search over the (replicated) PE array.

A search state places a prefix of the vertices. Each level extends every kept
state by one (vertex, PE location) pair, where the vertex is an unmapped
neighbour of the placed set and the location is in, or adjacent to, the
occupied region. Only the ``k`` best children by total routing length survive.

Two vertex orders are available. ``"subtree"`` (default) fixes the vertex of
each level to the next one in a preorder of the BFS tree rooted at the graph
center, descending into smaller subtrees first; the beam then searches over
locations only. ``"frontier"`` lets every unmapped neighbour of the placed set
compete at every level. Because a partial mapping is only charged for arcs
whose ends are both placed, the frontier order keeps postponing the vertices
that are expensive to place until only distant PEs remain free.

Locations are physical (x, y) PEs with room for ``drf_capacity * num_slices``
vertices; a vertex takes the lowest replica that still has a free slot there,
and that replica index becomes its slice id.
"""

from __future__ import annotations

import numpy as np

from ..arch import ArchConfig
from ..errors import CapacityError
from ..graph import Graph, graph_center
from .mapping import Mapping

_MASK64 = (1 << 64) - 1
_BIG = np.iinfo(np.int64).max // 4


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class _State:
    __slots__ = ("loc", "rep", "occ", "f", "frontier", "h")

    def __init__(self, loc, rep, occ, f, frontier, h):
        self.loc = loc
        self.rep = rep
        self.occ = occ
        self.f = f
        self.frontier = frontier
        self.h = h

    def child(self) -> _State:
        return _State(self.loc.copy(), self.rep.copy(), self.occ.copy(), self.f,
                      None if self.frontier is None else set(self.frontier), self.h)


class _Problem:
    def __init__(self, g: Graph, cfg: ArchConfig):
        self.g = g
        self.cfg = cfg
        self.n = g.num_vertices
        self.slices = cfg.num_slices(self.n)
        self.cap = cfg.drf_capacity * self.slices
        w, h = cfg.array_width, cfg.array_height
        self.width = w
        self.num_locs = w * h
        lx = np.arange(self.num_locs) % w
        ly = np.arange(self.num_locs) // w
        self.dist = (np.abs(lx[:, None] - lx[None, :]) + np.abs(ly[:, None] - ly[None, :])).astype(np.int64)
        self.near = (self.dist <= 1).astype(np.int64)
        cx, cy = cfg.center
        self.center_loc = cy * w + cx

        # undirected neighbourhood with arc multiplicity (1 or 2 arcs per pair)
        mult: dict[tuple[int, int], int] = {}
        for u, v, _ in g.arcs:
            key = (u, v) if u < v else (v, u)
            mult[key] = mult.get(key, 0) + 1
        nb: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for (a, b), c in mult.items():
            nb[a].append((b, c))
            nb[b].append((a, c))
        ptr = [0]
        idx: list[int] = []
        cnt: list[int] = []
        for lst in nb:
            lst.sort()
            idx.extend(b for b, _ in lst)
            cnt.extend(c for _, c in lst)
            ptr.append(len(idx))
        self.nb_ptr = np.asarray(ptr, dtype=np.int64)
        self.nb_idx = np.asarray(idx, dtype=np.int64)
        self.nb_mult = np.asarray(cnt, dtype=np.int64)
        self.nb_list = [tuple(b for b, _ in lst) for lst in nb]
        self.components = g.weak_components()

    def place(self, s: _State, v: int, loc: int) -> None:
        s.rep[v] = s.occ[loc] // self.cfg.drf_capacity
        s.occ[loc] += 1
        s.loc[v] = loc
        if s.frontier is not None:
            s.frontier.discard(v)
            for w in self.nb_list[v]:
                if s.loc[w] < 0:
                    s.frontier.add(w)
        s.h ^= _splitmix(v * self.num_locs + loc)

    def delta(self, s: _State, cand: np.ndarray) -> np.ndarray:
        """Routing-length increase for each (candidate vertex, location)."""
        starts = self.nb_ptr[cand]
        lens = self.nb_ptr[cand + 1] - starts
        owner = np.repeat(np.arange(len(cand)), lens)
        offs = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
        flat = starts[owner] + offs
        nl = s.loc[self.nb_idx[flat]]
        keep = nl >= 0
        owner, nl, mult = owner[keep], nl[keep], self.nb_mult[flat][keep]
        contrib = self.dist[nl] * mult[:, None]
        first = np.flatnonzero(np.r_[True, owner[1:] != owner[:-1]])
        return np.add.reduceat(contrib, first, axis=0)

    def free_locs(self, s: _State) -> np.ndarray:
        region = (s.occ > 0).astype(np.int64)
        reach = (self.near @ region) > 0
        return reach & (s.occ < self.cap)

    def seed_component(self, s: _State, root: int) -> None:
        """Place a component's first vertex on the free PE nearest the array centre."""
        free = np.flatnonzero(s.occ < self.cap)
        d = self.dist[self.center_loc, free]
        self.place(s, root, int(free[np.argmin(d)]))

    def subtree_order(self, comp: list[int]) -> list[int]:
        """Preorder of the BFS tree from the component's center, smaller subtrees first."""
        root = graph_center(self.g, comp)
        parent = {root: root}
        bfs = [root]
        for u in bfs:
            for w in self.nb_list[u]:
                if w not in parent:
                    parent[w] = u
                    bfs.append(w)
        size = dict.fromkeys(bfs, 1)
        kids: dict[int, list[int]] = {u: [] for u in bfs}
        for u in reversed(bfs[1:]):
            size[parent[u]] += size[u]
        for u in bfs[1:]:
            kids[parent[u]].append(u)
        out = []
        stack = [root]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(sorted(kids[u], key=lambda w: (size[w], w), reverse=True))
        return out


def _expand(prob: _Problem, beams: list[_State], k: int, cand_of) -> list[_State]:
    fs, vs, ls, rs = [], [], [], []
    for rank, s in enumerate(beams):
        cand = cand_of(s)
        total = prob.delta(s, cand) + s.f
        total[:, ~prob.free_locs(s)] = _BIG
        flat = total.ravel()
        if flat.size > k:
            kth = np.partition(flat, k - 1)[k - 1]
            sel = np.flatnonzero(flat <= kth)
        else:
            sel = np.arange(flat.size)
        sel = sel[flat[sel] < _BIG]
        rows, cols = np.divmod(sel, prob.num_locs)
        fs.append(flat[sel])
        vs.append(cand[rows])
        ls.append(cols)
        rs.append(np.full(len(sel), rank))
    f_all, v_all, l_all, r_all = (np.concatenate(a) for a in (fs, vs, ls, rs))
    # lower f, then lower vertex id, then row-major PE, then parent rank
    order = np.lexsort((r_all, l_all, v_all, f_all))
    seen: set[int] = set()
    nxt: list[_State] = []
    for i in order.tolist():
        parent = beams[r_all[i]]
        v, loc = int(v_all[i]), int(l_all[i])
        h = parent.h ^ _splitmix(v * prob.num_locs + loc)
        if h in seen:
            continue
        seen.add(h)
        child = parent.child()
        child.f = int(f_all[i])
        prob.place(child, v, loc)
        nxt.append(child)
        if len(nxt) == k:
            break
    return nxt


VERTEX_ORDERS = ("subtree", "frontier")


def beam_search_initial(g: Graph, cfg: ArchConfig, k: int = 10, vertex_order: str = "subtree") -> Mapping:
    if k < 1:
        raise ValueError("beam width must be >= 1")
    if vertex_order not in VERTEX_ORDERS:
        raise ValueError(f"vertex_order must be one of {VERTEX_ORDERS}")
    n = g.num_vertices
    if n == 0:
        return Mapping((), cfg.num_slices(0))
    prob = _Problem(g, cfg)
    if n > prob.cap * prob.num_locs:
        raise CapacityError(f"{n} vertices exceed array capacity {prob.cap * prob.num_locs}")
    frontier_mode = vertex_order == "frontier"
    root = _State(np.full(n, -1, dtype=np.int64), np.zeros(n, dtype=np.int64),
                  np.zeros(prob.num_locs, dtype=np.int64), 0, set() if frontier_mode else None, 0)
    beams = [root]

    if frontier_mode:
        comps = iter(prob.components)
        for _ in range(n):
            if not beams[0].frontier:
                # every beam holds the same set of finished components, so all run dry together
                c = graph_center(g, next(comp for comp in comps if beams[0].loc[comp[0]] < 0))
                for s in beams:
                    prob.seed_component(s, c)
                continue
            beams = _expand(prob, beams, k,
                            lambda s: np.asarray(sorted(s.frontier), dtype=np.int64))
    else:
        for comp in prob.components:
            seq = prob.subtree_order(comp)
            for s in beams:
                prob.seed_component(s, seq[0])
            for v in seq[1:]:
                cand = np.asarray([v], dtype=np.int64)
                beams = _expand(prob, beams, k, lambda s: cand)

    best = beams[0]
    w = prob.width
    locs = [(int(l) % w, int(l) // w, int(r)) for l, r in zip(best.loc.tolist(), best.rep.tolist())]
    return Mapping.from_locations(locs, prob.slices, cfg)
