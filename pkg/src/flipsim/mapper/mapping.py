"""Vertex -> (PE, DRF slot, slice) assignments and their text form."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

from ..arch import ArchConfig
from ..errors import CapacityError, GraphFormatError
from ..graph import Graph


class Placement(NamedTuple):
    x: int
    y: int
    slot: int
    slice: int

    @property
    def pe(self) -> tuple[int, int]:
        return self.x, self.y

    @property
    def key(self) -> tuple[int, int, int]:
        return self.x, self.y, self.slice


class CollisionSet(NamedTuple):
    pe: tuple[int, int]
    slice: int
    source: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class Mapping:
    placements: tuple[Placement, ...]
    num_slices: int

    @classmethod
    def from_locations(cls, locs: Sequence[tuple[int, int, int]], num_slices: int, cfg: ArchConfig) -> Mapping:
        """Build a mapping from per-vertex (x, y, slice); slots go in ascending vertex id per PE/slice."""
        fill: dict[tuple[int, int, int], int] = {}
        out = []
        for v, (x, y, s) in enumerate(locs):
            slot = fill.get((x, y, s), 0)
            if slot >= cfg.drf_capacity:
                raise CapacityError(f"PE ({x},{y}) slice {s} over capacity at vertex {v}")
            fill[(x, y, s)] = slot + 1
            out.append(Placement(int(x), int(y), slot, int(s)))
        return cls(tuple(out), num_slices)

    def __len__(self) -> int:
        return len(self.placements)

    def pe_of(self, v: int) -> tuple[int, int]:
        return self.placements[v].pe

    def locations(self) -> list[tuple[int, int, int]]:
        return [p.key for p in self.placements]

    def validate(self, g: Graph, cfg: ArchConfig) -> None:
        if len(self.placements) != g.num_vertices:
            raise CapacityError(f"mapping covers {len(self.placements)} vertices, graph has {g.num_vertices}")
        if self.num_slices != cfg.num_slices(g.num_vertices):
            raise CapacityError(f"mapping has {self.num_slices} slices, expected {cfg.num_slices(g.num_vertices)}")
        used: set[tuple[int, int, int, int]] = set()
        for v, p in enumerate(self.placements):
            if not (0 <= p.x < cfg.array_width and 0 <= p.y < cfg.array_height):
                raise CapacityError(f"vertex {v} placed off-array at ({p.x},{p.y})")
            if not 0 <= p.slot < cfg.drf_capacity:
                raise CapacityError(f"vertex {v} in slot {p.slot} >= drf_capacity")
            if not 0 <= p.slice < self.num_slices:
                raise CapacityError(f"vertex {v} in slice {p.slice} >= {self.num_slices}")
            key = (p.x, p.y, p.slice, p.slot)
            if key in used:
                raise CapacityError(f"two vertices share PE ({p.x},{p.y}) slice {p.slice} slot {p.slot}")
            used.add(key)

    def to_text(self, g: Graph | None = None) -> str:
        lines = [f"mapping vertices {len(self.placements)} slices {self.num_slices}"]
        lines.extend(f"v {v} pe {p.x} {p.y} slot {p.slot} slice {p.slice}" for v, p in enumerate(self.placements))
        if g is not None:
            lines.append(f"summary f_M {total_routing_length(g, self)} "
                         f"collision_sets {len(detect_collisions(g, self))} num_slices {self.num_slices}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Mapping:
        num_slices = None
        rows: dict[int, Placement] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            parts = raw.split()
            if not parts:
                continue
            try:
                if parts[0] == "mapping":
                    num_slices = int(parts[4])
                elif parts[0] == "v":
                    rows[int(parts[1])] = Placement(int(parts[3]), int(parts[4]), int(parts[6]), int(parts[8]))
                elif parts[0] != "summary":
                    raise GraphFormatError(f"unexpected record {parts[0]!r}", lineno)
            except (IndexError, ValueError):
                raise GraphFormatError(f"malformed mapping line {raw!r}", lineno) from None
        if num_slices is None:
            raise GraphFormatError("missing mapping header")
        if sorted(rows) != list(range(len(rows))):
            raise GraphFormatError("vertex ids in mapping are not dense")
        return cls(tuple(rows[v] for v in range(len(rows))), num_slices)

    def save(self, path: str | Path, g: Graph | None = None) -> None:
        Path(path).write_text(self.to_text(g))


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def total_routing_length(g: Graph, m: Mapping | Sequence) -> int:
    """Sum of Manhattan route lengths over directed arcs.

    ``m`` may be a Mapping or a per-vertex sequence of (x, y) / None for a
    partial mapping; arcs with an unmapped end are skipped.
    """
    pos = [p.pe for p in m.placements] if isinstance(m, Mapping) else list(m)
    total = 0
    for u, v, _ in g.arcs:
        a, b = pos[u], pos[v]
        if a is not None and b is not None:
            total += abs(a[0] - b[0]) + abs(a[1] - b[1])
    return total


def detect_collisions(g: Graph, m: Mapping) -> list[CollisionSet]:
    """One set per (source u, PE/slice) receiving two or more of u's successors."""
    out = []
    for u in range(g.num_vertices):
        groups: dict[tuple[int, int, int], list[int]] = {}
        for v, _ in g.out_adj[u]:
            groups.setdefault(m.placements[v].key, []).append(v)
        for (x, y, s), members in groups.items():
            if len(members) >= 2:
                out.append(CollisionSet((x, y), s, u, tuple(sorted(members))))
    out.sort(key=lambda c: (c.source, c.slice, c.pe[1], c.pe[0]))
    return out


def congested_arcs(collisions: Sequence[CollisionSet]) -> set[tuple[int, int]]:
    return {(c.source, v) for c in collisions for v in c.members}
