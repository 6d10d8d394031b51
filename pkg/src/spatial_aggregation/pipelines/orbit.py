"""First-layer orbit classification from a phase-space point set.

The points are joined by a minimal spanning tree, edges much longer than
their neighbors are cut, and the orbit type is read off the pieces: how many
sizeable clusters remain and whether the main tree is a path whose ends meet.
Every test is a ratio or a topological count, so labels do not change under
translation, rotation or uniform scaling.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .. import operators as ops
from ..errors import ConfigurationError, FieldError
from ..field import PointSet
from ..ngraph import NGraph, UnionFind, inconsistent_edges
from ..objects import SpatialObject

LABELS = ("fixed-point", "open-curve", "closed-curve", "island-chain", "spatter")


@dataclass(frozen=True)
class OrbitParams:
    k_sigma: float = 2.0
    depth: int = 5
    closure_ratio: float = 3.0
    min_ratio: float = 3.0
    path_fraction: float = 0.95
    branch_fraction: float = 0.05
    min_cluster_size: int = 3
    min_cluster_fraction: float = 0.05
    min_points: int = 5
    fixed_point_ratio: float = 1e-6
    duplicate_tol: float = 1e-12

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 < self.path_fraction <= 1 or not 0 < self.branch_fraction < 1:
            raise ConfigurationError("path_fraction and branch_fraction must be fractions")


@dataclass(frozen=True)
class OrbitReport:
    label: str
    cluster_count: int
    needs_more_points: bool = False
    inconsistent_edges: int = 0
    properties: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown orbit label {self.label!r}")
        if self.label == "island-chain" and self.cluster_count < 2:
            raise ValueError("an island chain needs at least two clusters")

    def to_dict(self) -> dict:
        return {
            "orbit": {
                "label": self.label,
                "clusters": self.cluster_count,
                "needs_more_points": self.needs_more_points,
                "inconsistent_edges": self.inconsistent_edges,
                "properties": self.properties,
            }
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def merge_duplicates(coords: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Collapse points closer than ``tol``; returns (unique points, original -> unique map)."""
    n = len(coords)
    uf = UnionFind(n)
    if n > 1:
        for i, j in sorted(cKDTree(coords).query_pairs(tol)):
            uf.union(i, j)
    root_to_new: dict[int, int] = {}
    mapping = np.empty(n, dtype=int)
    keep = []
    for i in range(n):
        root = uf.find(i)
        if root not in root_to_new:
            root_to_new[root] = len(keep)
            keep.append(i)
        mapping[i] = root_to_new[root]
    return coords[keep], mapping


def _tree_distances(g: NGraph, nodes: list[int], source: int) -> dict[int, float]:
    allowed = set(nodes)
    dist = {source: 0.0}
    stack = [source]
    while stack:
        u = stack.pop()
        for v in g.adjacency[u]:
            if v in allowed and v not in dist:
                dist[v] = dist[u] + g.weight(u, v)
                stack.append(v)
    return dist


def tree_diameter_ends(g: NGraph, nodes: list[int]) -> tuple[int, int]:
    """Ends of the longest weighted path in the subtree spanned by ``nodes``."""
    first = _tree_distances(g, nodes, nodes[0])
    a = max(sorted(first), key=lambda k: first[k])
    second = _tree_distances(g, nodes, a)
    b = max(sorted(second), key=lambda k: second[k])
    return a, b


def visit_period(sequence, max_period: int | None = None) -> int | None:
    """Smallest p with sequence[t + p] == sequence[t] for all t, if the sequence repeats."""
    seq = list(sequence)
    limit = max_period or len(seq) // 2
    for p in range(1, limit + 1):
        if all(seq[t] == seq[t + p] for t in range(len(seq) - p)):
            return p
    return None


def _shape_features(tree: NGraph, cut: frozenset, members: list[int]) -> dict:
    kept = {e: w for e, w in tree.edges.items() if e not in cut and e[0] in members}
    member_set = set(members)
    degree = {m: 0 for m in members}
    for i, j in kept:
        if i in member_set and j in member_set:
            degree[i] += 1
            degree[j] += 1
    n = len(members)
    weights = [w for (i, j), w in kept.items() if i in member_set and j in member_set]
    mean_edge = float(np.mean(weights)) if weights else 0.0
    sub = NGraph(tree.nodes, {e: w for e, w in kept.items() if e[0] in member_set and e[1] in member_set})
    a, b = tree_diameter_ends(sub, members)
    gap = math.dist(tree.nodes[a].geom, tree.nodes[b].geom)
    return {
        "path_fraction": sum(1 for d in degree.values() if d <= 2) / n,
        "branch_fraction": sum(1 for d in degree.values() if d >= 3) / n,
        "mean_edge": mean_edge,
        "end_gap": gap,
        "gap_ratio": gap / mean_edge if mean_edge > 0 else math.inf,
    }


def orbit_rules(params: OrbitParams) -> ops.RuleSet:
    """Orbit-type production rules over an ``orbit-graph`` summary object."""

    def f(obj, key):
        return obj.props[key]

    return ops.RuleSet(
        "orbit-types",
        (
            ops.Rule(
                "collapsed",
                lambda o: f(o, "n_distinct") == 1
                or f(o, "diameter") <= params.fixed_point_ratio * f(o, "coordinate_scale"),
                "fixed-point",
            ),
            ops.Rule("too-few-points", lambda o: f(o, "n_distinct") < params.min_points, "spatter"),
            ops.Rule("several-clusters", lambda o: f(o, "cluster_count") >= 2, "island-chain"),
            ops.Rule("branching", lambda o: f(o, "branch_fraction") > params.branch_fraction, "spatter"),
            ops.Rule("not-path-shaped", lambda o: f(o, "path_fraction") < params.path_fraction, "spatter"),
            ops.Rule("ends-meet", lambda o: f(o, "gap_ratio") <= params.closure_ratio, "closed-curve"),
            ops.Rule("ends-apart", lambda o: True, "open-curve"),
        ),
    )


def classify_orbit(points: PointSet, params: OrbitParams | None = None) -> OrbitReport:
    params = params or OrbitParams()
    if len(points) == 0:
        raise FieldError("cannot classify an empty point set")
    if points.dim != 2:
        raise FieldError("orbit classification works on 2-D point sets")
    coords = np.asarray(points.points, dtype=float)
    scale = float(np.max(np.abs(coords)))
    unique, mapping = merge_duplicates(coords, params.duplicate_tol * max(1.0, scale))
    n = len(unique)
    objects = PointSet(unique).objects()

    tree = ops.aggregate(objects, "mst")
    cut = inconsistent_edges(tree, params.k_sigma, params.depth, params.min_ratio)
    min_size = max(params.min_cluster_size, math.ceil(params.min_cluster_fraction * n))
    cluster_rules = ops.RuleSet(
        "clusters",
        (
            ops.Rule("sizeable", lambda members: len(members) >= min_size, "cluster"),
            ops.Rule("fragment", lambda members: True, "fragment"),
        ),
    )
    clusters = ops.classify(
        tree,
        lambda a, b: 1.0 if tuple(sorted((a.props["index"], b.props["index"]))) in cut else 0.0,
        0.5,
        cluster_rules,
    )
    sizeable = clusters.select(["cluster"])
    islands = ops.redescribe(sizeable, tree, _island)

    extent = unique.max(axis=0) - unique.min(axis=0)
    summary = {
        "n_distinct": n,
        "diameter": float(np.hypot(*extent)),
        "coordinate_scale": scale,
        "cluster_count": len(islands),
        "path_fraction": 1.0,
        "branch_fraction": 0.0,
        "gap_ratio": math.inf,
    }
    if n >= params.min_points and islands:
        main = max(islands, key=lambda o: (len(o.props["members"]), -o.props["class_id"]))
        summary.update(_shape_features(tree, cut, list(main.props["members"])))
    rules = orbit_rules(params)
    rule = rules.first(SpatialObject("orbit-graph", (), summary))
    label = rule.verdict()

    props = {k: _round(v) for k, v in summary.items() if k not in ("coordinate_scale",)}
    props["rule"] = rule.name
    if label == "fixed-point":
        props["period"] = 1
    elif label == "island-chain":
        props["period"] = visit_period(_island_visits(unique, islands)[mapping])
    return OrbitReport(
        label=label,
        cluster_count=1 if label == "fixed-point" else max(1, summary["cluster_count"]),
        needs_more_points=rule.name == "too-few-points",
        inconsistent_edges=len(cut),
        properties=props,
    )


def _island_visits(coords: np.ndarray, islands: list[SpatialObject]) -> np.ndarray:
    """Island index per point; fragment points join the island of their nearest member."""
    members = np.array([m for o in islands for m in o.props["members"]])
    owner = np.array([k for k, o in enumerate(islands) for _ in o.props["members"]])
    _, nearest = cKDTree(coords[members]).query(coords)
    return owner[nearest]


def _island(sub: NGraph, label: str) -> SpatialObject:
    pts = np.array([o.geom for o in sub.nodes])
    return SpatialObject("island", tuple(map(tuple, pts)), {"location": tuple(pts.mean(axis=0))})


def _round(v):
    if isinstance(v, float):
        return None if math.isinf(v) else round(v, 12)
    return v
