"""Parameterised FLIP fabric: geometry, capacities, offsets, packets, routing tables.

Table layout per (PE, slice):

* Inter-Table: entry ``s`` (``s < drf_capacity``) is the head of the scatter list
  of the vertex in DRF slot ``s``; tail entries follow in slot order. One entry
  per distinct destination (PE, slice) of the vertex, so a packet reaching a PE
  serves every successor co-located there.
* Intra-Table: entry ``b`` (``b < hash_buckets``) is the head of the list for
  ``src_id % hash_buckets``; tail entries follow in bucket order. One entry per
  incoming arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterator, NamedTuple

from .errors import CapacityError, ConfigError, OffsetOverflow, TableOverflow
from .graph import Graph

Coord = tuple[int, int]


@dataclass(frozen=True)
class ArchConfig:
    array_width: int = 8
    array_height: int = 8
    drf_capacity: int = 4
    cluster_dim: int = 2
    input_buffer_depth: int = 8
    aluin_buffer_depth: int = 8
    aluout_buffer_depth: int = 8
    memory_buffer_depth: int = 8
    offset_bits: int = 3
    id_bits: int = 16
    slice_id_bits: int = 8
    inter_table_entries: int = 64
    intra_table_entries: int = 64
    hash_buckets: int = 8
    t_hop: int = 4
    t_tab_per_entry: int = 1
    swap_latency: int = 100
    spm_bytes: int = 16 * 1024
    packet_bytes: int = 8
    clock_hz: float = 100e6
    watchdog_cycles: int = 20_000

    def __post_init__(self):
        w, h, c = self.array_width, self.array_height, self.cluster_dim
        if w < 1 or h < 1:
            raise ConfigError("array dimensions must be positive")
        if c < 1 or w % c or h % c:
            raise ConfigError(f"array {w}x{h} not divisible by cluster_dim {c}")
        if self.drf_capacity < 1:
            raise ConfigError("drf_capacity must be >= 1")
        if self.max_hops < w - 1 or self.max_hops < h - 1:
            raise ConfigError(f"offset_bits={self.offset_bits} cannot span a {w}x{h} array")
        if self.t_hop < 1:
            raise ConfigError("t_hop must be >= 1")
        if self.aluout_buffer_depth < 1 or self.aluin_buffer_depth < 1:
            raise ConfigError("ALU buffers need depth >= 1")
        if self.input_buffer_depth < 1 or self.memory_buffer_depth < 1:
            raise ConfigError("router and memory buffers need depth >= 1")
        if self.inter_table_entries < self.drf_capacity:
            raise ConfigError("Inter-Table smaller than its head block")
        if self.intra_table_entries < self.hash_buckets:
            raise ConfigError("Intra-Table smaller than its head block")

    @classmethod
    def with_overrides(cls, **kw) -> ArchConfig:
        known = {f.name for f in fields(cls)}
        bad = set(kw) - known
        if bad:
            raise ConfigError(f"unknown ArchConfig fields: {sorted(bad)}")
        return replace(cls(), **{k: v for k, v in kw.items() if v is not None})

    @property
    def max_hops(self) -> int:
        return (1 << self.offset_bits) - 1

    @property
    def num_pes(self) -> int:
        return self.array_width * self.array_height

    @property
    def pe_capacity(self) -> int:
        return self.num_pes * self.drf_capacity

    @property
    def max_slices(self) -> int:
        return 1 << self.slice_id_bits

    @property
    def max_vertex_id(self) -> int:
        return (1 << self.id_bits) - 1

    @property
    def spm_packet_capacity(self) -> int:
        return self.spm_bytes // self.packet_bytes

    @property
    def center(self) -> Coord:
        return self.array_width // 2, self.array_height // 2

    def cluster_of(self, x: int, y: int) -> Coord:
        return x // self.cluster_dim, y // self.cluster_dim

    def num_slices(self, num_vertices: int) -> int:
        """Replica count ceil(|V| / (PEs x DRF capacity)), at least 1."""
        s = max(1, math.ceil(num_vertices / self.pe_capacity))
        if s > self.max_slices:
            raise CapacityError(
                f"{num_vertices} vertices need {s} slices; slice_id_bits={self.slice_id_bits} allows {self.max_slices}")
        return s

    def pes(self) -> Iterator[Coord]:
        """PE coordinates in row-major order (y outer)."""
        for y in range(self.array_height):
            for x in range(self.array_width):
                yield x, y


class Offset(NamedTuple):
    """Hop fields of a packet. Direction bit 1 means the positive direction."""

    x_dir: int
    x_hops: int
    y_dir: int
    y_hops: int

    @property
    def hops(self) -> int:
        return self.x_hops + self.y_hops

    @property
    def delivered(self) -> bool:
        return self.x_hops == 0 and self.y_hops == 0

    def fields(self, offset_bits: int = 3) -> str:
        return (f"x:{{{self.x_dir},{self.x_hops:0{offset_bits}b}}} "
                f"y:{{{self.y_dir},{self.y_hops:0{offset_bits}b}}}")


ZERO_OFFSET = Offset(0, 0, 0, 0)


def encode_offset(src: Coord, dst: Coord, offset_bits: int = 3) -> Offset:
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    limit = (1 << offset_bits) - 1
    if abs(dx) > limit or abs(dy) > limit:
        raise OffsetOverflow(f"displacement ({dx},{dy}) exceeds {limit} hops")
    return Offset(int(dx > 0), abs(dx), int(dy > 0), abs(dy))


def decode_offset(src: Coord, off: Offset) -> Coord:
    sx = 1 if off.x_dir else -1
    sy = 1 if off.y_dir else -1
    return src[0] + sx * off.x_hops, src[1] + sy * off.y_hops


def hash_src(src_id: int, buckets: int = 8) -> int:
    return src_id % buckets


class Packet(NamedTuple):
    src_id: int
    offset: Offset
    attribute: int
    dst_slice: int


class InterTableEntry(NamedTuple):
    src_id: int
    offset: Offset
    slice_id: int
    next: int | None


class IntraTableEntry(NamedTuple):
    src_id: int
    dst_reg: int
    weight: int
    next: int | None


@dataclass
class PETables:
    """Configuration image of one PE for one slice."""

    pe: Coord
    slice_id: int
    drf: list[int | None]
    inter: list[InterTableEntry | None]
    intra: list[IntraTableEntry | None]

    def _walk(self, table, head: int) -> list:
        out = []
        idx: int | None = head
        seen = set()
        while idx is not None and table[idx] is not None:
            if idx in seen:
                raise ValueError(f"cycle in table list at PE {self.pe} slice {self.slice_id}")
            seen.add(idx)
            out.append(table[idx])
            idx = table[idx].next
        return out

    def scatter_list(self, slot: int) -> list[InterTableEntry]:
        return self._walk(self.inter, slot)

    def bucket(self, b: int) -> list[IntraTableEntry]:
        return self._walk(self.intra, b)


@dataclass
class ConfigImage:
    """Per-(PE, slice) tables for a whole mapped graph."""

    cfg: ArchConfig
    num_slices: int
    tables: dict[tuple[int, int, int], PETables] = field(default_factory=dict)

    def get(self, x: int, y: int, s: int) -> PETables:
        return self.tables[(x, y, s)]

    def dump(self) -> str:
        """Deterministic text form for golden-file comparisons."""
        bits = self.cfg.offset_bits
        out = [f"image {self.cfg.array_width}x{self.cfg.array_height} slices {self.num_slices}"]
        for key in sorted(self.tables, key=lambda k: (k[2], k[1], k[0])):
            t = self.tables[key]
            if all(v is None for v in t.drf):
                continue
            out.append(f"pe {t.pe[0]} {t.pe[1]} slice {t.slice_id}")
            out.append("  drf " + " ".join("-" if v is None else str(v) for v in t.drf))
            for i, e in enumerate(t.inter):
                if e is not None:
                    nxt = "NULL" if e.next is None else e.next
                    out.append(f"  inter {i} src {e.src_id} {e.offset.fields(bits)} slice {e.slice_id} next {nxt}")
            for i, e in enumerate(t.intra):
                if e is not None:
                    nxt = "NULL" if e.next is None else e.next
                    out.append(f"  intra {i} src {e.src_id} reg {e.dst_reg} w {e.weight} next {nxt}")
        return "\n".join(out) + "\n"


def layout_lists(lists: list[list], heads: int, capacity: int, make, where: str) -> list:
    """Place list ``i`` with its head at index ``i`` and tails appended after the head block."""
    table: list = [None] * heads
    tail_pos = heads
    for i, items in enumerate(lists):
        if not items:
            continue
        positions = [i] + list(range(tail_pos, tail_pos + len(items) - 1))
        tail_pos += len(items) - 1
        table.extend([None] * (len(items) - 1))
        for j, item in enumerate(items):
            nxt = positions[j + 1] if j + 1 < len(items) else None
            table[positions[j]] = make(item, nxt)
    if len(table) > capacity:
        raise TableOverflow(f"{where} needs {len(table)} entries, capacity {capacity}")
    return table + [None] * (capacity - len(table))


def build_tables(g: Graph, m, cfg: ArchConfig) -> ConfigImage:
    """Encode every arc of ``g`` as Inter/Intra-Table entries under mapping ``m``.

    Scatter lists come out ordered by ascending destination vertex id; the
    compiler re-orders them farthest-first with ``mapper.sort_inter_tables``.
    """
    m.validate(g, cfg)
    if g.num_vertices and g.num_vertices - 1 > cfg.max_vertex_id:
        raise ConfigError(f"vertex ids need more than id_bits={cfg.id_bits}")
    place = m.placements
    residents: dict[tuple[int, int, int], list[int | None]] = {}
    for v, p in enumerate(place):
        drf = residents.setdefault((p.x, p.y, p.slice), [None] * cfg.drf_capacity)
        drf[p.slot] = v

    img = ConfigImage(cfg, m.num_slices)
    intra_lists: dict[tuple[int, int, int], list[list[tuple[int, int, int]]]] = {}
    for key in residents:
        intra_lists[key] = [[] for _ in range(cfg.hash_buckets)]
    for u, v, w in g.arcs:
        pv = place[v]
        intra_lists[(pv.x, pv.y, pv.slice)][hash_src(u, cfg.hash_buckets)].append((u, pv.slot, w))

    for key, drf in residents.items():
        x, y, s = key
        scatter: list[list[tuple[int, Offset, int]]] = []
        for u in drf:
            groups: list[tuple[int, Offset, int]] = []
            if u is not None:
                seen: set[tuple[int, int, int]] = set()
                for v, _ in g.out_adj[u]:
                    pv = place[v]
                    dst = (pv.x, pv.y, pv.slice)
                    if dst not in seen:
                        seen.add(dst)
                        groups.append((u, encode_offset((x, y), (pv.x, pv.y), cfg.offset_bits), pv.slice))
            scatter.append(groups)
        inter = layout_lists(scatter, cfg.drf_capacity, cfg.inter_table_entries,
                             lambda it, nxt: InterTableEntry(it[0], it[1], it[2], nxt),
                             f"Inter-Table of PE ({x},{y}) slice {s}")
        buckets = [sorted(b) for b in intra_lists[key]]
        intra = layout_lists(buckets, cfg.hash_buckets, cfg.intra_table_entries,
                             lambda it, nxt: IntraTableEntry(it[0], it[1], it[2], nxt),
                             f"Intra-Table of PE ({x},{y}) slice {s}")
        img.tables[key] = PETables((x, y), s, list(drf), inter, intra)
    return img


def reconstruct_arcs(img: ConfigImage) -> list[tuple[int, int, int]]:
    """Inverse of build_tables: recover the arc list from the Intra-Tables and DRF images."""
    arcs = []
    for t in img.tables.values():
        for b in range(img.cfg.hash_buckets):
            for e in t.bucket(b):
                arcs.append((e.src_id, t.drf[e.dst_reg], e.weight))
    return sorted(arcs)
