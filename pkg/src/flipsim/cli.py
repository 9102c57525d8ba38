"""Experiment driver: build or load a graph, compile it, simulate it per source and report.

Examples::

    flipsim --family lrn --kernel bfs --sources 100 --seed 7 --out-csv lrn.csv
    flipsim --graph g.el --kernel wcc
    flipsim --family tree --kernel bfs                # starts from the root only
    flipsim --family syn --compile-only --mapping-out syn.map

A config file holds ``key = value`` lines named after the long flags
(``array = 8x8``, ``verify = false``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracle
from .arch import ArchConfig
from .errors import CapacityError, ConfigError, FlipError, GraphFormatError, OffsetOverflow, TableOverflow
from .generators import FamilyKind, GraphFamily, generate
from .graph import Graph, load_edge_list
from .kernels import KernelName, KernelSpec, get_kernel
from .mapper import EstimatorParams, compile_graph
from .mapper.beam import VERTEX_ORDERS
from .metrics import compute, csv_text, json_text
from .simulator import run as simulate

EXIT_OK, EXIT_USAGE, EXIT_MAPPER, EXIT_MISMATCH = 0, 1, 2, 3
MAPPER_ERRORS = (CapacityError, TableOverflow, OffsetOverflow)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _array(text: str) -> tuple[int, int]:
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flipsim", description="Map graphs onto a data-centric PE array and simulate them.")
    src = p.add_argument_group("graph")
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--family", choices=[f.value for f in FamilyKind], help="generated graph family")
    src.add_argument("--num-vertices", type=int, help="override the family's vertex count")
    src.add_argument("--weighted", action=argparse.BooleanOptionalAction, default=False,
                     help="random arc weights for generated graphs")
    src.add_argument("--seed", type=int, default=0, help="graph, source and mapper seed")

    run = p.add_argument_group("run")
    run.add_argument("--kernel", default="bfs", choices=[k.value for k in KernelName])
    run.add_argument("--sources", type=int, default=1, help="number of random source vertices")
    run.add_argument("--source-id", type=int, help="fixed source vertex")
    run.add_argument("--wcc-seed-mode", default="all", choices=["all", "local-min"])
    run.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True,
                     help="compare final attributes against the reference algorithms")
    run.add_argument("--jobs", type=int, default=1, help="parallel simulations")

    arch = p.add_argument_group("architecture and mapper")
    arch.add_argument("--array", type=_array, default=(8, 8), metavar="WxH")
    arch.add_argument("--drf-capacity", type=int, default=4)
    arch.add_argument("--t-hop", type=int, default=4)
    arch.add_argument("--swap-latency", type=int, default=100)
    arch.add_argument("--beam-width", type=int, default=10)
    arch.add_argument("--vertex-order", default="subtree", choices=list(VERTEX_ORDERS))
    arch.add_argument("--local-opt", action=argparse.BooleanOptionalAction, default=True)

    out = p.add_argument_group("output")
    out.add_argument("--compile-only", action="store_true", help="map and report, no simulation")
    out.add_argument("--mapping-out", help="write the mapping file here")
    out.add_argument("--trace", help="write simulation traces as JSON lines")
    out.add_argument("--out-csv", help="per-run metrics table")
    out.add_argument("--out-json", help="per-run metrics plus summary")
    out.add_argument("--config", help="file of key = value defaults")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_to_argv(text: str, parser: argparse.ArgumentParser) -> list[str]:
    """Turn ``key = value`` lines into flags that argparse can consume."""
    known = {a.dest: a for a in parser._actions}
    argv: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or key not in known or key in ("config", "help", "version"):
            raise ConfigError(f"config line {lineno}: unknown or malformed entry {raw.strip()!r}")
        flag = "--" + key.replace("_", "-")
        action = known[key]
        if isinstance(action, argparse.BooleanOptionalAction) or action.nargs == 0:
            truth = value.lower()
            if truth not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config line {lineno}: {key} expects true/false")
            on = truth in ("true", "1", "yes")
            if isinstance(action, argparse.BooleanOptionalAction):
                argv.append(flag if on else "--no-" + flag[2:])
            elif on:
                argv.append(flag)
        else:
            argv += [flag, value]
    return argv


@dataclass
class RunConfig:
    graph: str | None = None
    family: str | None = None
    num_vertices: int | None = None
    weighted: bool = False
    seed: int = 0
    kernel: str = "bfs"
    sources: int = 1
    source_id: int | None = None
    wcc_seed_mode: str = "all"
    verify: bool = True
    jobs: int = 1
    array: tuple[int, int] = (8, 8)
    drf_capacity: int = 4
    t_hop: int = 4
    swap_latency: int = 100
    beam_width: int = 10
    vertex_order: str = "subtree"
    local_opt: bool = True
    compile_only: bool = False
    mapping_out: str | None = None
    trace: str | None = None
    out_csv: str | None = None
    out_json: str | None = None
    config: str | None = None
    params: EstimatorParams = field(default_factory=EstimatorParams)

    def arch(self) -> ArchConfig:
        return ArchConfig(array_width=self.array[0], array_height=self.array[1], drf_capacity=self.drf_capacity,
                          t_hop=self.t_hop, swap_latency=self.swap_latency)

    def validate(self) -> None:
        if (self.graph is None) == (self.family is None):
            raise ConfigError("give exactly one of --graph or --family")
        if self.graph is not None and not Path(self.graph).is_file():
            raise ConfigError(f"graph file not found: {self.graph}")
        if self.sources < 1 or self.jobs < 1 or self.beam_width < 1:
            raise ConfigError("--sources, --jobs and --beam-width must be positive")
        if self.source_id is not None and get_kernel(self.kernel).name is KernelName.WCC:
            raise ConfigError("wcc takes no source vertex")

    def header(self) -> dict:
        """Everything needed to reproduce the run, defaults included."""
        h = {k: v for k, v in asdict(self).items() if k != "params"}
        h["array"] = f"{self.array[0]}x{self.array[1]}"
        h.update({f"arch.{k}": v for k, v in asdict(self.arch()).items()})
        h.update({f"estimator.{k}": v for k, v in asdict(self.params).items()})
        h["version"] = __version__
        return {k: ("" if v is None else v) for k, v in h.items()}


def load_graph(rc: RunConfig) -> tuple[Graph, str]:
    if rc.graph is not None:
        return load_edge_list(rc.graph), Path(rc.graph).stem
    fam = GraphFamily.parse(rc.family, rc.num_vertices, rc.weighted)
    return generate(fam, rc.seed), fam.kind.value


def choose_sources(rc: RunConfig, g: Graph, kernel: KernelSpec) -> list[int | None]:
    """Source vertices in ascending order; ``[None]`` for kernels without a source."""
    if not kernel.needs_source:
        return [None]
    n = g.num_vertices
    if rc.source_id is not None:
        if not 0 <= rc.source_id < n:
            raise ConfigError(f"source {rc.source_id} outside [0,{n})")
        return [rc.source_id]
    if rc.family == FamilyKind.TREE.value:
        return [0]
    rng = np.random.default_rng([rc.seed, 1])
    return sorted(int(v) for v in rng.choice(n, size=min(rc.sources, n), replace=False))


def reference(kernel: KernelSpec, g: Graph, source: int | None) -> list[int]:
    if kernel.name is KernelName.BFS:
        return oracle.bfs_levels(g, source).attributes
    if kernel.name is KernelName.SSSP:
        return oracle.sssp_distances(g, source).attributes
    return oracle.wcc_labels(g).attributes


def _simulate_one(args) -> tuple[dict, list[dict] | None]:
    g, m, img, kernel, source, cfg, rc, name, want_trace = args
    res = simulate(g, m, img, kernel, source, cfg, rc.wcc_seed_mode)
    rep = compute(res, m, g, cfg)
    row = dict(graph=name, seed=rc.seed, num_vertices=g.num_vertices, num_arcs=g.num_arcs,
               num_slices=m.num_slices, kernel=kernel.name.value, source=source, **rep.summary())
    row["verified"] = (res.attributes == reference(kernel, g, source)) if rc.verify else None
    trace = None
    if want_trace:
        w = cfg.array_width
        trace = [dict(source=source, **e.to_record(w)) for e in res.trace]
    return row, trace


@dataclass
class Outcome:
    status: int
    rows: list[dict]
    header: dict
    messages: list[str] = field(default_factory=list)


def run_experiment(rc: RunConfig) -> Outcome:
    rc.validate()
    kernel = get_kernel(rc.kernel)
    cfg = rc.arch()
    g, name = load_graph(rc)
    header = rc.header()
    table_graph = g.symmetrized() if kernel.symmetric else g
    cr = compile_graph(g, cfg, rc.params, rc.beam_width, rc.seed, rc.local_opt, rc.vertex_order, table_graph)
    if rc.mapping_out:
        cr.mapping.save(rc.mapping_out, g)
    if rc.compile_only:
        report = dict(graph=name, num_vertices=g.num_vertices, num_arcs=g.num_arcs,
                      num_slices=cr.mapping.num_slices, f_beam=cr.f_beam, f_final=cr.f_final,
                      avg_routing_length=cr.f_final / g.num_arcs if g.num_arcs else 0.0,
                      collision_count=len(cr.collisions), local_swaps=cr.swaps,
                      **{f"time_{k}_s": v for k, v in cr.timings.items()})
        return Outcome(EXIT_OK, [report], header)

    sources = choose_sources(rc, g, kernel)
    jobs = [(g, cr.mapping, cr.image, kernel, s, cfg, rc, name, rc.trace is not None) for s in sources]
    if rc.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=rc.jobs) as ex:
            results = list(ex.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(j) for j in jobs]
    rows = [r for r, _ in results]
    if rc.trace:
        with open(rc.trace, "w") as fh:
            for _, tr in results:
                for rec in tr:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
    out = Outcome(EXIT_OK, rows, header)
    for r in rows:
        if r["verified"] is False:
            out.status = EXIT_MISMATCH
            where = rc.graph or f"--family {rc.family} --seed {rc.seed}"
            src = "" if r["source"] is None else f" --source-id {r['source']}"
            out.messages.append(f"oracle mismatch: {where} --kernel {rc.kernel}{src}")
    return out


def _write_reports(rc: RunConfig, out: Outcome) -> None:
    if rc.compile_only:
        text = json.dumps({"config": out.header, "compile": out.rows[0]}, indent=2, sort_keys=True) + "\n"
        if rc.out_json:
            Path(rc.out_json).write_text(text)
        for k, v in out.rows[0].items():
            print(f"{k}: {v:.6f}" if isinstance(v, float) else f"{k}: {v}")
        return
    if rc.out_csv:
        Path(rc.out_csv).write_text(csv_text(out.rows, out.header))
    if rc.out_json:
        Path(rc.out_json).write_text(json_text(out.rows, out.header))
    if not rc.out_csv and not rc.out_json:
        sys.stdout.write(csv_text(out.rows, out.header))
    else:
        ok = sum(r["verified"] is not False for r in out.rows)
        cycles = float(np.mean([r["total_cycles"] for r in out.rows]))
        print(f"{len(out.rows)} runs, {ok} verified or unchecked, mean cycles {cycles:.1f}")


def parse_run_config(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            text = Path(known.config).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        argv = config_to_argv(text, parser) + argv
    ns = parser.parse_args(argv)
    return RunConfig(**vars(ns))


def main(argv: list[str] | None = None) -> int:
    try:
        rc = parse_run_config(argv)
        started = time.perf_counter()
        out = run_experiment(rc)
        _write_reports(rc, out)
    except MAPPER_ERRORS as e:
        print(f"flipsim: mapper failure: {e}", file=sys.stderr)
        return EXIT_MAPPER
    except (ConfigError, GraphFormatError, OSError, ValueError) as e:
        print(f"flipsim: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FlipError as e:
        print(f"flipsim: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    for msg in out.messages:
        print(f"flipsim: {msg}", file=sys.stderr)
    print(f"elapsed {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return out.status


if __name__ == "__main__":
    sys.exit(main())
