import dataclasses
import json

import pytest

from flipsim.arch import ArchConfig
from flipsim.errors import TraceError
from flipsim.generators import GraphFamily, generate
from flipsim.graph import Graph
from flipsim.kernels import BFS, WCC
from flipsim.mapper import compile_graph
from flipsim.metrics import ROW_COLUMNS, compute, csv_text, json_text
from flipsim.simulator import EventKind

from test_simulator import simulate


@pytest.fixture(scope="module")
def lrn_run():
    cfg = ArchConfig()
    g = generate(GraphFamily.parse("lrn"), 1)
    m = compile_graph(g, cfg, seed=1).mapping
    res = simulate(g, m, cfg, BFS, 5)
    return g, m, cfg, res, compute(res, m, g, cfg)


def test_path_has_no_parallelism():
    cfg = ArchConfig()
    g = Graph.from_edges(True, 20, [(i, i + 1, 1) for i in range(19)])
    m = compile_graph(g, cfg).mapping
    for kernel, src in ((BFS, 0), (WCC, None)):
        res = simulate(g, m, cfg, kernel, src)
        rep = compute(res, m, g, cfg)
        if kernel is BFS:
            assert rep.avg_parallelism <= 1.0 + 1e-9 and rep.max_parallelism == 1


def test_series_shape_and_integral(lrn_run):
    g, m, cfg, res, rep = lrn_run
    assert len(rep.parallelism) == rep.total_cycles == res.total_cycles
    starts = {(e.a, e.b): e.cycle for e in res.trace if e.kind is EventKind.ApplyStart}
    busy = 0
    for e in res.trace:
        if e.kind is EventKind.ApplyEnd:
            s = starts[(e.a, e.b)]
            busy += e.cycle - s + 1
            assert min(rep.parallelism[s:e.cycle + 1]) >= 1
    assert sum(rep.parallelism) == busy


def test_counts_agree_with_simulator(lrn_run):
    g, m, cfg, res, rep = lrn_run
    assert rep.traversed_edges == res.counters["arc_applies"]
    assert rep.mteps == pytest.approx(rep.traversed_edges / (rep.total_cycles / cfg.clock_hz) / 1e6)
    assert rep.swap_count == res.counters["swaps"] == 0
    assert rep.avg_routing_length == pytest.approx(compile_graph(g, cfg, seed=1).f_final / g.num_arcs)
    assert rep.avg_pkt_wait_cycles >= 0 and rep.avg_aluin_depth >= 0


def test_truncated_trace_rejected(lrn_run):
    g, m, cfg, res, _ = lrn_run
    last_end = max(i for i, e in enumerate(res.trace) if e.kind is EventKind.ApplyEnd)
    cut = dataclasses.replace(res, trace=res.trace[:last_end])
    with pytest.raises(TraceError):
        compute(cut, m, g, cfg)
    short = dataclasses.replace(res, total_cycles=res.total_cycles // 2)
    with pytest.raises(TraceError):
        compute(short, m, g, cfg)


def test_report_formats(lrn_run):
    g, m, cfg, res, rep = lrn_run
    row = dict(graph="lrn", seed=1, num_vertices=g.num_vertices, num_arcs=g.num_arcs, num_slices=1,
               kernel="bfs", source=5, verified=True, **rep.summary())
    text = csv_text([row, row], {"b": 2, "a": 1})
    lines = text.splitlines()
    assert lines[:2] == ["# a=1", "# b=2"]
    assert lines[2] == ",".join(ROW_COLUMNS)
    assert lines[3] == lines[4] and len(lines) == 5
    doc = json.loads(json_text([row], {"a": 1}))
    assert doc["summary"]["runs"] == 1 and doc["summary"]["all_verified"]
    assert doc["summary"]["mean_total_cycles"] == rep.total_cycles
