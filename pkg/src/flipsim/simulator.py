"""Cycle-level execution of a mapped graph on the fabric.

Per cycle, every PE with pending work runs these phases in order:

1. completions: finished vertex programs write the DRF and push (vertex,
   attribute) records to ALUout;
2. ALUout dispatch: at most one packet, built from the next Inter-Table entry of
   the head record; zero-offset packets bypass the router;
3. router: the round-robin arbiter picks one ready head packet among the N, E,
   S, W and local input buffers; it is forwarded one hop (Y first, then X) if the
   downstream buffer has credit, or delivered if both hop fields are zero;
4. memory buffer: one packet drains toward the scratchpad (SPM);
5. refill: one packet from the slice-load queue enters ALUin;
6. ALU: if idle, pop ALUin, search the Intra-Table bucket and run the kernel
   once per matching arc.

After all PEs, each 2x2 cluster's swap controller may finish or start a slice
swap. A forwarded packet is usable downstream ``t_hop`` cycles later; the credit
it frees upstream is visible from the next cycle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

from .arch import ArchConfig, ConfigImage
from .errors import ConfigError, Livelock, SpmOverflow
from .graph import Graph
from .kernels import KernelSpec, source_init
from .mapper.mapping import Mapping


class EventKind(IntEnum):
    Inject = 0
    Hop = 1
    Deliver = 2
    ApplyStart = 3
    ApplyEnd = 4
    ScatterEmit = 5
    BufferToSPM = 6
    SliceLoad = 7
    SliceEvict = 8


class TraceEvent(NamedTuple):
    """One trace record. Field meaning of a, b, c by kind:

    Inject: packet, source vertex, destination slice
    Hop: packet, direction (see ``DIRECTIONS``), 0
    Deliver: packet, cycles waited in input buffers, 1 if activation else 0
    ApplyStart: vertex, packet, 1 if activation else 0
    ApplyEnd: vertex, packet, 1 if the attribute changed else 0
    ScatterEmit: packet, source vertex, route length in hops
    BufferToSPM: packet, destination slice, 0
    SliceLoad / SliceEvict: cluster, slice, 0
    """

    cycle: int
    pe: int
    kind: EventKind
    a: int
    b: int
    c: int

    def to_record(self, width: int) -> dict:
        rec = {"cycle": self.cycle, "pe": [self.pe % width, self.pe // width], "kind": self.kind.name}
        names = _PAYLOAD[self.kind]
        for name, val in zip(names, (self.a, self.b, self.c)):
            if name:
                rec[name] = DIRECTIONS[val] if name == "dir" else val
        return rec


_PAYLOAD = {
    EventKind.Inject: ("packet", "src", "slice"),
    EventKind.Hop: ("packet", "dir", None),
    EventKind.Deliver: ("packet", "wait", "activation"),
    EventKind.ApplyStart: ("vertex", "packet", "activation"),
    EventKind.ApplyEnd: ("vertex", "packet", "updated"),
    EventKind.ScatterEmit: ("packet", "src", "hops"),
    EventKind.BufferToSPM: ("packet", "slice", None),
    EventKind.SliceLoad: ("cluster", "slice", None),
    EventKind.SliceEvict: ("cluster", "slice", None),
}

# hop directions; +y is increasing row index
DIRECTIONS = ("+y", "-y", "+x", "-x")
N, E, S, W, LOCAL = range(5)
# input port on the receiving PE for each hop direction
_ARRIVAL_PORT = (N, S, W, E)

# packet record layout (mutable list for speed)
P_ID, P_SRC, P_XDIR, P_XH, P_YDIR, P_YH, P_ATTR, P_SLICE, P_READY, P_WAIT, P_ACT = range(11)


@dataclass
class SimResult:
    attributes: list[int]
    total_cycles: int
    trace: list[TraceEvent]
    counters: dict[str, int] = field(default_factory=dict)
    cfg: ArchConfig | None = None


class _Job(NamedTuple):
    vertex: int
    start: int
    end: int
    attr: int
    updated: bool
    push: bool
    packet: int


class Simulator:
    def __init__(self, g: Graph, m: Mapping, image: ConfigImage, kernel: KernelSpec, source: int | None,
                 cfg: ArchConfig, wcc_seed_mode: str = "all", audit: bool = False):
        if cfg.aluout_buffer_depth < cfg.drf_capacity + 1:
            raise ConfigError("aluout_buffer_depth must be >= drf_capacity + 1")
        self.g, self.m, self.img, self.k, self.cfg = g, m, image, kernel, cfg
        self.audit = audit
        W, H = cfg.array_width, cfg.array_height
        self.W, self.H = W, H
        npe = W * H
        self.npe = npe
        cd = cfg.cluster_dim
        self.cw = W // cd
        self.pe_cluster = [((i % W) // cd) + ((i // W) // cd) * self.cw for i in range(npe)]
        ncl = self.cw * (H // cd)
        self.cluster_pes = [[i for i in range(npe) if self.pe_cluster[i] == c] for c in range(ncl)]
        self.ncl = ncl

        n = g.num_vertices
        self.v_pe = [p.y * W + p.x for p in m.placements]
        self.v_slice = [p.slice for p in m.placements]

        # Intra-Table lookup per (pe, slice): src -> (entries visited, [(vertex, weight), ...])
        self.intra: dict[tuple[int, int], dict[int, tuple[int, list[tuple[int, int]]]]] = {}
        # Inter-Table scatter list per vertex: [(xdir, xh, ydir, yh, slice), ...] in stored order
        self.scatter: list[list[tuple[int, int, int, int, int]]] = [[] for _ in range(n)]
        for (x, y, s), t in image.tables.items():
            pe = y * W + x
            look: dict[int, tuple[int, list[tuple[int, int]]]] = {}
            for b in range(cfg.hash_buckets):
                lst = t.bucket(b)
                for e in lst:
                    look.setdefault(e.src_id, (len(lst), []))[1].append((t.drf[e.dst_reg], e.weight))
            self.intra[(pe, s)] = look
            for slot, v in enumerate(t.drf):
                if v is not None:
                    self.scatter[v] = [(e.offset.x_dir, e.offset.x_hops, e.offset.y_dir, e.offset.y_hops, e.slice_id)
                                       for e in t.scatter_list(slot)]

        attrs, seeds = source_init(kernel, g, source, wcc_seed_mode)
        self.attr = attrs
        self.seeds = seeds

        depth = cfg.input_buffer_depth
        self.inq = [[deque() for _ in range(5)] for _ in range(npe)]
        self.credit = [[depth] * 5 for _ in range(npe)]
        self.rr = [0] * npe
        self.aluin = [deque() for _ in range(npe)]
        self.aluout: list[list[list]] = [[] for _ in range(npe)]
        self.membuf = [deque() for _ in range(npe)]
        self.refill = [deque() for _ in range(npe)]
        self.jobs: list[deque[_Job]] = [deque() for _ in range(npe)]

        self.resident: list[int | None] = [0] * ncl
        self.swap_end = [-1] * ncl
        self.swap_target = [0] * ncl
        self.spm: list[dict[int, deque]] = [dict() for _ in range(ncl)]
        self.spm_count = 0
        self.pending_act: list[dict[int, list[int]]] = [dict() for _ in range(ncl)]

        self.cycle = 0
        self.trace: list[TraceEvent] = []
        self.next_pid = 0
        self.active: set[int] = set()
        self.freed: list[tuple[int, int]] = []
        self.progress = False
        self.counters = dict(packets=0, deliveries=0, activations=0, arc_applies=0, updates=0,
                             swaps=0, spm_parks=0, hops=0, bypass=0, consumed=0)

        for v in seeds:
            c = self.pe_cluster[self.v_pe[v]]
            if self.v_slice[v] == 0:
                self._refill_activation(v)
            else:
                self.pending_act[c].setdefault(self.v_slice[v], []).append(v)

    # -- helpers -------------------------------------------------------------

    def _ev(self, pe: int, kind: EventKind, a: int, b: int = 0, c: int = 0) -> None:
        self.trace.append(TraceEvent(self.cycle, pe, kind, a, b, c))

    def _new_packet(self, src: int, off, attr: int, act: bool) -> list:
        pid = self.next_pid
        self.next_pid += 1
        if off is None:
            return [pid, src, 0, 0, 0, 0, attr, self.v_slice[src], 0, 0, act]
        xd, xh, yd, yh, sl = off
        return [pid, src, xd, xh, yd, yh, attr, sl, 0, 0, act]

    def _refill_activation(self, v: int) -> None:
        pe = self.v_pe[v]
        self.refill[pe].append(self._new_packet(v, None, self.attr[v], True))
        self.counters["activations"] += 1
        self.active.add(pe)

    def _slice_live(self, pe: int, sl: int) -> bool:
        c = self.pe_cluster[pe]
        return self.swap_end[c] < 0 and self.resident[c] == sl

    def _to_aluin(self, pe: int, pkt: list) -> None:
        self.aluin[pe].append(pkt)
        self.counters["deliveries"] += 1
        self._ev(pe, EventKind.Deliver, pkt[P_ID], pkt[P_WAIT], int(pkt[P_ACT]))

    # -- per-PE phases -------------------------------------------------------

    def _complete(self, pe: int) -> None:
        jobs = self.jobs[pe]
        c = self.cycle
        while jobs and jobs[0].end < c:
            j = jobs.popleft()
            self.progress = True
            if j.updated:
                assert j.attr <= self.attr[j.vertex], "attribute increased"
                self.attr[j.vertex] = j.attr
            if j.push:
                self._push_aluout(pe, j.vertex, j.attr)

    def _push_aluout(self, pe: int, v: int, attr: int) -> None:
        out = self.aluout[pe]
        for rec in out:
            if rec[0] == v and rec[2] == 0:
                rec[1] = attr
                return
        out.append([v, attr, 0])
        assert len(out) <= self.cfg.aluout_buffer_depth

    def _dispatch(self, pe: int) -> None:
        out = self.aluout[pe]
        while out and not self.scatter[out[0][0]]:
            out.pop(0)
            self.progress = True
        if not out:
            return
        rec = out[0]
        v, attr, idx = rec
        group = self.scatter[v][idx]
        xd, xh, yd, yh, sl = group
        if xh == 0 and yh == 0:
            if self._slice_live(pe, sl):
                if len(self.aluin[pe]) >= self.cfg.aluin_buffer_depth:
                    return
                pkt = self._new_packet(v, group, attr, False)
                self._ev(pe, EventKind.ScatterEmit, pkt[P_ID], v, 0)
                self._to_aluin(pe, pkt)
            else:
                if len(self.membuf[pe]) >= self.cfg.memory_buffer_depth:
                    return
                pkt = self._new_packet(v, group, attr, False)
                self._ev(pe, EventKind.ScatterEmit, pkt[P_ID], v, 0)
                self.membuf[pe].append(pkt)
            self.counters["bypass"] += 1
        else:
            if self.credit[pe][LOCAL] <= 0:
                return
            pkt = self._new_packet(v, group, attr, False)
            self._ev(pe, EventKind.ScatterEmit, pkt[P_ID], v, xh + yh)
            pkt[P_READY] = self.cycle
            self.credit[pe][LOCAL] -= 1
            self.inq[pe][LOCAL].append(pkt)
            self._ev(pe, EventKind.Inject, pkt[P_ID], v, sl)
        self.counters["packets"] += 1
        self.progress = True
        rec[2] = idx + 1
        if rec[2] == len(self.scatter[v]):
            out.pop(0)

    def _route(self, pe: int) -> None:
        q = self.inq[pe]
        c = self.cycle
        start = self.rr[pe]
        for i in range(5):
            port = (start + i) % 5
            buf = q[port]
            if not buf or buf[0][P_READY] > c:
                continue
            pkt = buf[0]
            if pkt[P_YH] or pkt[P_XH]:
                if pkt[P_YH]:
                    d = 0 if pkt[P_YDIR] else 1
                    nxt = pe + self.W if pkt[P_YDIR] else pe - self.W
                else:
                    d = 2 if pkt[P_XDIR] else 3
                    nxt = pe + 1 if pkt[P_XDIR] else pe - 1
                inport = _ARRIVAL_PORT[d]
                if self.credit[nxt][inport] <= 0:
                    continue
                buf.popleft()
                pkt[P_WAIT] += c - pkt[P_READY]
                if pkt[P_YH]:
                    pkt[P_YH] -= 1
                else:
                    pkt[P_XH] -= 1
                pkt[P_READY] = c + self.cfg.t_hop
                self.credit[nxt][inport] -= 1
                self.inq[nxt][inport].append(pkt)
                self.active.add(nxt)
                self.counters["hops"] += 1
                self._ev(pe, EventKind.Hop, pkt[P_ID], d)
            else:
                if self._slice_live(pe, pkt[P_SLICE]):
                    if len(self.aluin[pe]) >= self.cfg.aluin_buffer_depth:
                        continue
                    buf.popleft()
                    pkt[P_WAIT] += c - pkt[P_READY]
                    self._to_aluin(pe, pkt)
                else:
                    if len(self.membuf[pe]) >= self.cfg.memory_buffer_depth:
                        continue
                    buf.popleft()
                    pkt[P_WAIT] += c - pkt[P_READY]
                    self.membuf[pe].append(pkt)
            self.freed.append((pe, port))
            self.rr[pe] = (port + 1) % 5
            self.progress = True
            return

    def _drain_memory(self, pe: int) -> None:
        mb = self.membuf[pe]
        if not mb:
            return
        pkt = mb.popleft()
        self.progress = True
        cl = self.pe_cluster[pe]
        sl = pkt[P_SLICE]
        if self._slice_live(pe, sl):
            self.refill[pe].append(pkt)
            return
        if self.spm_count >= self.cfg.spm_packet_capacity:
            raise SpmOverflow(f"scratchpad full ({self.cfg.spm_packet_capacity} packets) at cycle {self.cycle}")
        self.spm[cl].setdefault(sl, deque()).append((self.cycle, pe, pkt))
        self.spm_count += 1
        self.counters["spm_parks"] += 1
        self._ev(pe, EventKind.BufferToSPM, pkt[P_ID], sl)

    def _refill(self, pe: int) -> None:
        rq = self.refill[pe]
        if rq and len(self.aluin[pe]) < self.cfg.aluin_buffer_depth:
            self._to_aluin(pe, rq.popleft())
            self.progress = True

    def _alu(self, pe: int) -> None:
        if self.jobs[pe] or not self.aluin[pe]:
            return
        pkt = self.aluin[pe].popleft()
        self.counters["consumed"] += 1
        self.progress = True
        c = self.cycle
        k = self.k
        jobs = self.jobs[pe]
        pid = pkt[P_ID]
        if pkt[P_ACT]:
            v = pkt[P_SRC]
            end = c + k.cycles_update - 1
            jobs.append(_Job(v, c, end, self.attr[v], False, True, pid))
            self._ev(pe, EventKind.ApplyStart, v, pid, 1)
            self._ev_at(end, pe, EventKind.ApplyEnd, v, pid, 0)
            return
        search, targets = self.intra[(pe, pkt[P_SLICE])][pkt[P_SRC]]
        t = c + search * self.cfg.t_tab_per_entry
        msg = pkt[P_ATTR]
        first = True
        for v, w in targets:
            r = k.apply(self.attr[v], msg, w)
            start = c if first else t
            end = t + r.cost - 1
            jobs.append(_Job(v, start, end, r.attribute, r.updated, r.updated, pid))
            self._ev_at(start, pe, EventKind.ApplyStart, v, pid, 0)
            self._ev_at(end, pe, EventKind.ApplyEnd, v, pid, int(r.updated))
            self.counters["arc_applies"] += 1
            self.counters["updates"] += int(r.updated)
            t = end + 1
            first = False

    def _ev_at(self, cycle: int, pe: int, kind: EventKind, a: int, b: int, c: int) -> None:
        self.trace.append(TraceEvent(cycle, pe, kind, a, b, c))

    # -- clusters ------------------------------------------------------------

    def _cluster_idle(self, cl: int) -> bool:
        for pe in self.cluster_pes[cl]:
            if self.jobs[pe] or self.aluin[pe] or self.aluout[pe] or self.membuf[pe] or self.refill[pe]:
                return False
        return True

    def _swap_control(self, cl: int) -> None:
        c = self.cycle
        if self.swap_end[cl] >= 0:
            if c < self.swap_end[cl]:
                return
            sl = self.swap_target[cl]
            self.swap_end[cl] = -1
            self.resident[cl] = sl
            self.progress = True
            lead = self.cluster_pes[cl][0]
            self._ev(lead, EventKind.SliceLoad, cl, sl)
            for v in sorted(self.pending_act[cl].pop(sl, [])):
                self._refill_activation(v)
            for _, pe, pkt in self.spm[cl].pop(sl, ()):
                self.refill[pe].append(pkt)
                self.spm_count -= 1
                self.active.add(pe)
            return
        best = None
        for sl, q in self.spm[cl].items():
            if q and sl != self.resident[cl]:
                key = (q[0][0], sl)
                best = key if best is None or key < best else best
        for sl in self.pending_act[cl]:
            if sl != self.resident[cl]:
                key = (-1, sl)
                best = key if best is None or key < best else best
        if best is None or not self._cluster_idle(cl):
            return
        lead = self.cluster_pes[cl][0]
        self._ev(lead, EventKind.SliceEvict, cl, self.resident[cl])
        self.resident[cl] = None
        self.swap_target[cl] = best[1]
        self.swap_end[cl] = c + self.cfg.swap_latency
        self.counters["swaps"] += 1
        self.progress = True

    # -- main loop -----------------------------------------------------------

    def _pe_has_work(self, pe: int) -> bool:
        return bool(self.jobs[pe] or self.aluin[pe] or self.aluout[pe] or self.membuf[pe]
                    or self.refill[pe] or any(self.inq[pe]))

    def _next_timer(self) -> int | None:
        c = self.cycle
        best = None
        for pe in self.active:
            for buf in self.inq[pe]:
                if buf and buf[0][P_READY] > c:
                    t = buf[0][P_READY]
                    best = t if best is None or t < best else best
            if self.jobs[pe]:
                t = self.jobs[pe][0].end + 1
                best = t if best is None or t < best else best
        for cl in range(self.ncl):
            if self.swap_end[cl] >= 0:
                t = self.swap_end[cl]
                best = t if best is None or t < best else best
        return best

    def _pending_swaps(self) -> bool:
        return self.spm_count > 0 or any(self.pending_act) or any(e >= 0 for e in self.swap_end)

    def step(self) -> None:
        self.progress = False
        for pe in sorted(self.active):
            self._complete(pe)
            self._dispatch(pe)
            self._route(pe)
            self._drain_memory(pe)
            self._refill(pe)
            self._alu(pe)
        if self._pending_swaps():
            for cl in range(self.ncl):
                self._swap_control(cl)
        for pe, port in self.freed:
            self.credit[pe][port] += 1
        self.freed.clear()
        if self.audit:
            self._check()
        self.active = {pe for pe in self.active if self._pe_has_work(pe)}

    def run(self) -> SimResult:
        idle_cycles = 0
        while self.active or self._pending_swaps():
            self.step()
            if self.progress:
                idle_cycles = 0
                self.cycle += 1
                continue
            nxt = self._next_timer()
            if nxt is None or nxt <= self.cycle:
                raise Livelock(f"no progress possible at cycle {self.cycle}")
            idle_cycles += nxt - self.cycle
            if idle_cycles > self.cfg.watchdog_cycles:
                raise Livelock(f"no progress for {idle_cycles} cycles at cycle {self.cycle}")
            self.cycle = nxt
        self.trace.sort(key=lambda e: (e.cycle, e.pe, e.kind))
        return SimResult(list(self.attr), self.cycle, self.trace, dict(self.counters), self.cfg)

    def _check(self) -> None:
        cfg = self.cfg
        live = 0
        for pe in range(self.npe):
            for port in range(5):
                n = len(self.inq[pe][port])
                assert n <= cfg.input_buffer_depth, "input buffer overflow"
                assert self.credit[pe][port] == cfg.input_buffer_depth - n, "credit mismatch"
                assert self.credit[pe][port] >= 0
                live += n
            assert len(self.aluin[pe]) <= cfg.aluin_buffer_depth
            assert len(self.membuf[pe]) <= cfg.memory_buffer_depth
            assert len(self.aluout[pe]) <= cfg.aluout_buffer_depth
            live += len(self.aluin[pe]) + len(self.membuf[pe]) + len(self.refill[pe])
        assert self.spm_count <= cfg.spm_packet_capacity
        assert live + self.spm_count + self.counters["consumed"] == self.next_pid, "packet lost or duplicated"


def run(g: Graph, m: Mapping, image: ConfigImage, kernel: KernelSpec, source: int | None,
        cfg: ArchConfig, wcc_seed_mode: str = "all", audit: bool = False) -> SimResult:
    """Simulate ``kernel`` until quiescence; ``image`` must encode the kernel's arc set."""
    return Simulator(g, m, image, kernel, source, cfg, wcc_seed_mode, audit).run()
