"""Contraction hierarchies and transit node routing for road-like graphs."""

from .ch import CHIndex, CHParams, build_hierarchy, ch_query
from .dijkstra import dijkstra
from .graph import INFINITY, Graph, apply_permutation, parse_dimacs, write_dimacs
from .many2many import DistanceTable, build_distance_table
from .query import QueryResult, locality_filter, query, table_query
from .target import TargetOracle, build_target_oracle, one_to_target
from .tnr import TNRIndex, build_tnr

__all__ = [
    "INFINITY",
    "CHIndex",
    "CHParams",
    "DistanceTable",
    "Graph",
    "QueryResult",
    "TNRIndex",
    "TargetOracle",
    "apply_permutation",
    "build_distance_table",
    "build_hierarchy",
    "build_target_oracle",
    "build_tnr",
    "ch_query",
    "dijkstra",
    "locality_filter",
    "one_to_target",
    "parse_dimacs",
    "query",
    "table_query",
    "write_dimacs",
]
