"""Evaluation quantities derived from a simulation trace and its mapping.

Definitions:

* traversed_edges: arc applications (one per matching Intra-Table entry of a
  delivered scatter packet); activation runs are not counted.
* parallelism[c]: vertices whose program is running at cycle c; averaged from
  the first program start up to quiescence, idle gaps included.
* avg_pkt_wait_cycles: per delivered scatter packet, cycles spent in input
  buffers beyond the fixed per-hop latency.
* avg_aluin_depth: ALUin occupancy averaged over all cycles and all PEs.
* avg_routing_length: Manhattan route length per directed arc of the input graph.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .arch import ArchConfig
from .errors import TraceError
from .graph import Graph
from .mapper.mapping import Mapping, detect_collisions, total_routing_length
from .simulator import EventKind, SimResult


@dataclass
class MetricsReport:
    total_cycles: int
    traversed_edges: int
    mteps: float
    avg_parallelism: float
    max_parallelism: int
    avg_routing_length: float
    avg_pkt_wait_cycles: float
    avg_aluin_depth: float
    swap_count: int
    collision_count: int
    parallelism: list[int] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("parallelism")
        return d


def compute(result: SimResult, m: Mapping, g: Graph, cfg: ArchConfig) -> MetricsReport:
    total = result.total_cycles
    npe = cfg.num_pes
    activation: set[int] = set()
    delivered: dict[int, int] = {}
    waits: list[int] = []
    open_apply: dict[tuple[int, int], int] = {}
    popped: dict[int, int] = {}
    delta = np.zeros(total + 1, dtype=np.int64)
    traversed = 0
    swaps = 0
    first_start = None
    for e in result.trace:
        if e.cycle >= total:
            raise TraceError(f"event at cycle {e.cycle} beyond run length {total}")
        kind = e.kind
        if kind is EventKind.Deliver:
            delivered[e.a] = e.cycle
            if e.c:
                activation.add(e.a)
            else:
                waits.append(e.b)
        elif kind is EventKind.ApplyStart:
            open_apply[(e.a, e.b)] = e.cycle
            popped.setdefault(e.b, e.cycle)
            if first_start is None:
                first_start = e.cycle
        elif kind is EventKind.ApplyEnd:
            start = open_apply.pop((e.a, e.b), None)
            if start is None:
                raise TraceError(f"ApplyEnd without ApplyStart for vertex {e.a} packet {e.b}")
            delta[start] += 1
            delta[e.cycle + 1] -= 1
            if e.b not in activation:
                traversed += 1
        elif kind is EventKind.SliceEvict:
            swaps += 1
    if open_apply:
        raise TraceError(f"{len(open_apply)} vertex programs never finished")
    if set(popped) != set(delivered):
        raise TraceError("delivered and consumed packet sets differ")

    par = np.cumsum(delta)[:total]
    window = par[first_start:] if first_start is not None else par[:0]
    aluin_integral = sum(popped[p] - delivered[p] for p in popped)
    seconds = total / cfg.clock_hz if total else 0.0
    return MetricsReport(
        total_cycles=total,
        traversed_edges=traversed,
        mteps=traversed / seconds / 1e6 if seconds else 0.0,
        avg_parallelism=float(window.mean()) if window.size else 0.0,
        max_parallelism=int(par.max()) if par.size else 0,
        avg_routing_length=total_routing_length(g, m) / g.num_arcs if g.num_arcs else 0.0,
        avg_pkt_wait_cycles=float(np.mean(waits)) if waits else 0.0,
        avg_aluin_depth=aluin_integral / (total * npe) if total else 0.0,
        swap_count=swaps,
        collision_count=len(detect_collisions(g, m)),
        parallelism=par.tolist(),
    )


ROW_COLUMNS = (
    "graph", "seed", "num_vertices", "num_arcs", "num_slices", "kernel", "source",
    "total_cycles", "traversed_edges", "mteps", "avg_parallelism", "max_parallelism",
    "avg_routing_length", "avg_pkt_wait_cycles", "avg_aluin_depth", "swap_count",
    "collision_count", "verified",
)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else str(v)


def write_csv(rows: list[dict], header: dict, out) -> None:
    """Comment lines carrying ``header`` (sorted keys), then a fixed-order table."""
    for key in sorted(header):
        out.write(f"# {key}={header[key]}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in ROW_COLUMNS])


def csv_text(rows: list[dict], header: dict) -> str:
    buf = io.StringIO()
    write_csv(rows, header, buf)
    return buf.getvalue()


def summarize(rows: list[dict]) -> dict:
    """Mean of each numeric column over ``rows``."""
    out: dict = {"runs": len(rows)}
    for c in ROW_COLUMNS:
        vals = [r[c] for r in rows if isinstance(r.get(c), (int, float)) and not isinstance(r.get(c), bool)]
        if vals and c not in ("seed", "source"):
            out[f"mean_{c}"] = float(np.mean(vals))
    out["all_verified"] = all(r.get("verified", True) is not False for r in rows)
    return out


def json_text(rows: list[dict], header: dict) -> str:
    return json.dumps({"config": header, "summary": summarize(rows), "runs": rows}, indent=2, sort_keys=True) + "\n"
