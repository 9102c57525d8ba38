"""Graph-to-fabric compiler."""

from .beam import beam_search_initial
from .estimator import EstimatorParams, arc_time, congested_arc_time, estimate_partial_runtime
from .layout import sort_inter_tables
from .local_opt import local_optimize
from .mapping import (CollisionSet, Mapping, Placement, congested_arcs, detect_collisions, manhattan,
                      total_routing_length)
from .pipeline import CompileResult, compile_graph

__all__ = [
    "CollisionSet", "CompileResult", "EstimatorParams", "Mapping", "Placement", "arc_time",
    "beam_search_initial", "compile_graph", "congested_arc_time", "congested_arcs", "detect_collisions",
    "estimate_partial_runtime", "local_optimize", "manhattan", "sort_inter_tables", "total_routing_length",
]
