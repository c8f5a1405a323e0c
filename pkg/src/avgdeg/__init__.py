"""Sublinear average-degree and vertex-count estimators over a metered graph oracle."""
from .graph_model import Graph, GraphFamilySpec, build_from_edges, generate, ground_truth
from .oracle import PRESETS, AccessPolicy, OracleSession, QueryMeter
from .primitives import Estimate, EstimatorConfig

__all__ = [
    "Graph", "GraphFamilySpec", "build_from_edges", "generate", "ground_truth",
    "PRESETS", "AccessPolicy", "OracleSession", "QueryMeter", "Estimate", "EstimatorConfig",
]
__version__ = "0.1.0"
