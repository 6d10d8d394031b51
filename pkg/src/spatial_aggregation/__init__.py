"""Spatial aggregation: build layers of symbolic objects from numerical fields.

Objects at one layer are joined into a neighborhood graph (``aggregate``),
cut into equivalence classes (``classify``) and lifted to objects of the
next layer (``redescribe``). The same operators serve every layer.
"""

from .field import GridField, PointSet, load_grid_text, load_pgm, load_points_csv
from .ngraph import NGraph, construct_delaunay, construct_knn, construct_mst, inconsistent_edges
from .objects import SpatialObject
from .operators import aggregate, classify, consistent, localize, redescribe, search
from .pipelines.orbit import classify_orbit
from .pipelines.tracer import trace_boundaries

__version__ = "0.1.0"

__all__ = [
    "GridField",
    "PointSet",
    "load_grid_text",
    "load_pgm",
    "load_points_csv",
    "NGraph",
    "construct_delaunay",
    "construct_knn",
    "construct_mst",
    "inconsistent_edges",
    "SpatialObject",
    "aggregate",
    "classify",
    "consistent",
    "localize",
    "redescribe",
    "search",
    "classify_orbit",
    "trace_boundaries",
]
