"""End-to-end compilation: placement, local optimisation, table build and layout."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..arch import ArchConfig, ConfigImage, build_tables
from ..graph import Graph
from .beam import beam_search_initial
from .estimator import EstimatorParams
from .layout import sort_inter_tables
from .local_opt import local_optimize
from .mapping import CollisionSet, Mapping, detect_collisions, total_routing_length


@dataclass
class CompileResult:
    mapping: Mapping
    beam_mapping: Mapping
    image: ConfigImage
    f_beam: int
    f_final: int
    collisions: list[CollisionSet]
    swaps: int
    timings: dict[str, float] = field(default_factory=dict)


def compile_graph(g: Graph, cfg: ArchConfig | None = None, params: EstimatorParams | None = None,
                  beam_width: int = 10, seed: int = 0, optimize: bool = True, vertex_order: str = "subtree",
                  table_graph: Graph | None = None) -> CompileResult:
    """Map ``g`` and build its configuration image.

    ``table_graph`` (default ``g``) is the arc set encoded in the tables; WCC
    passes the symmetrized graph so labels can flow against arc direction.
    """
    cfg = cfg or ArchConfig()
    params = params or EstimatorParams()
    timings = {}
    t0 = time.perf_counter()
    beam = beam_search_initial(g, cfg, beam_width, vertex_order)
    t1 = time.perf_counter()
    timings["beam"] = t1 - t0
    if optimize:
        final, swaps = local_optimize(g, beam, cfg, params, seed)
    else:
        final, swaps = beam, 0
    t2 = time.perf_counter()
    timings["local"] = t2 - t1
    img = sort_inter_tables(build_tables(table_graph or g, final, cfg))
    timings["layout"] = time.perf_counter() - t2
    return CompileResult(final, beam, img, total_routing_length(g, beam), total_routing_length(g, final),
                         detect_collisions(g, final), swaps, timings)
