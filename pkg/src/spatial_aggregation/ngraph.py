"""Neighborhood graphs: the interface between abstraction layers.

Nodes are the objects of one layer, edges are adjacency relations between
them. Every constructor here is a pure function returning an immutable
``NGraph`` whose ``provenance`` names the constructor that built it.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import Delaunay

from .errors import ConfigurationError, DegeneracyError, DuplicatePointError, FormatError
from .field import GridField, Metric, PointSet, field_cells, get_metric
from .geometry import EPS, min_separation
from .objects import SpatialObject, to_jsonable

Edge = tuple[int, int]

__all__ = [
    "NGraph",
    "Partition",
    "UnionFind",
    "construct",
    "construct_near",
    "construct_4adjacency",
    "grid_adjacency",
    "construct_knn",
    "construct_mst",
    "construct_delaunay",
    "graph_map",
    "graph_filter",
    "connected_components",
    "inconsistent_edges",
    "canonical_form",
]


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class NGraph:
    nodes: tuple[SpatialObject, ...]
    edges: Mapping[Edge, float | None]
    provenance: str = "predicate"

    def __post_init__(self):
        nodes = tuple(self.nodes)
        n = len(nodes)
        clean: dict[Edge, float | None] = {}
        for (i, j), w in dict(self.edges).items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references a missing node")
            e = _edge(i, j)
            if e in clean:
                raise ValueError(f"duplicate edge {e}")
            if w is not None:
                w = float(w)
                if not np.isfinite(w) or w < 0:
                    raise ValueError(f"edge {e} has invalid weight {w}")
            clean[e] = w
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", dict(sorted(clean.items())))

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, NGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edges

    def weight(self, i: int, j: int) -> float | None:
        return self.edges[_edge(i, j)]

    def total_weight(self) -> float:
        return float(sum(w for w in self.edges.values() if w is not None))

    def subgraph(self, members: Iterable[int]) -> "NGraph":
        """Induced subgraph; node order follows ``members`` sorted."""
        keep = sorted(set(members))
        pos = {old: new for new, old in enumerate(keep)}
        edges = {
            (pos[i], pos[j]): w for (i, j), w in self.edges.items() if i in pos and j in pos
        }
        return NGraph(tuple(self.nodes[i] for i in keep), edges, self.provenance)

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "nodes": [
                {"id": i, "kind": o.kind, "geom": to_jsonable(o.geom), "props": to_jsonable(o.props)}
                for i, o in enumerate(self.nodes)
            ],
            "edges": [[i, j] if w is None else [i, j, w] for (i, j), w in self.edges.items()],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "NGraph":
        try:
            nodes = []
            for k, node in enumerate(data["nodes"]):
                if node.get("id", k) != k:
                    raise FormatError(f"node ids must be 0..n-1 in order, got {node.get('id')} at {k}")
                nodes.append(SpatialObject(node["kind"], _tupled(node["geom"]), dict(node.get("props", {}))))
            edges = {}
            for e in data["edges"]:
                edges[(int(e[0]), int(e[1]))] = e[2] if len(e) > 2 else None
        except (KeyError, TypeError, IndexError) as exc:
            raise FormatError(f"malformed N-graph JSON: {exc}") from None
        return cls(tuple(nodes), edges, data.get("provenance", "json"))

    @classmethod
    def from_json(cls, text: str) -> "NGraph":
        return cls.from_dict(json.loads(text))


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


@dataclass(frozen=True, eq=True)
class Partition:
    """Equivalence classes over node indices; class id = smallest member."""

    class_of: tuple[int, ...]
    classes: Mapping[int, tuple[int, ...]] = field(compare=False)

    def __post_init__(self):
        seen = set()
        for cid, members in self.classes.items():
            if not members:
                raise ValueError(f"class {cid} is empty")
            for m in members:
                if m in seen:
                    raise ValueError(f"node {m} appears in two classes")
                if self.class_of[m] != cid:
                    raise ValueError(f"class_of[{m}] disagrees with classes")
                seen.add(m)
        if len(seen) != len(self.class_of):
            raise ValueError("classes do not cover every node")

    @classmethod
    def from_class_of(cls, class_of: Sequence[int]) -> "Partition":
        """Build from any labelling; ids are renamed to smallest members."""
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(class_of):
            groups.setdefault(c, []).append(i)
        canon = [0] * len(class_of)
        classes = {}
        for members in groups.values():
            cid = min(members)
            classes[cid] = tuple(sorted(members))
            for m in members:
                canon[m] = cid
        return cls(tuple(canon), dict(sorted(classes.items())))

    def __len__(self) -> int:
        return len(self.classes)

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(m) for m in self.classes.values()}

    def refines(self, other: "Partition") -> bool:
        """True if every class of self lies inside one class of other."""
        return all(len({other.class_of[m] for m in members}) == 1 for members in self.classes.values())


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


# -- constructors ----------------------------------------------------------

def construct(
    objects: Sequence[SpatialObject],
    neighbor_p: Callable[[SpatialObject, SpatialObject], bool],
    weight: Callable[[SpatialObject, SpatialObject], float] | None = None,
    provenance: str = "predicate",
) -> NGraph:
    """All-pairs N-graph constructor: edge (i, j) iff ``neighbor_p`` holds.

    This O(n^2) loop is the definition every accelerated constructor must
    agree with.
    """
    objects = tuple(objects)
    edges = {}
    for i in range(len(objects)):
        for j in range(i + 1, len(objects)):
            if neighbor_p(objects[i], objects[j]):
                edges[(i, j)] = weight(objects[i], objects[j]) if weight else None
    return NGraph(objects, edges, provenance)


def construct_near(
    objects: Sequence[SpatialObject],
    separation: float,
    distance: Callable[[SpatialObject, SpatialObject], float] = min_separation,
    inclusive: bool = False,
) -> NGraph:
    """Neighbors are objects whose separation is below ``separation``.

    The separation distance is stored as the edge weight.
    """
    objects = tuple(objects)
    edges = {}
    for i in range(len(objects)):
        for j in range(i + 1, len(objects)):
            d = distance(objects[i], objects[j])
            if d < separation or (inclusive and d <= separation):
                edges[(i, j)] = d
    return NGraph(objects, edges, f"near({separation:g})")


def grid_adjacency(pixels: Sequence[SpatialObject]) -> NGraph:
    """4-adjacency over pixel objects located at integer (row, col)."""
    pixels = tuple(pixels)
    index = {}
    for i, p in enumerate(pixels):
        if p.kind != "pixel":
            raise ConfigurationError(f"4-adjacency needs pixel objects, got {p.kind!r}")
        if p.geom in index:
            raise DuplicatePointError(f"two pixels at {p.geom}")
        index[p.geom] = i
    edges = {}
    for i, p in enumerate(pixels):
        r, c = p.geom
        for nb in ((r, c + 1), (r + 1, c)):
            j = index.get(nb)
            if j is not None:
                edges[_edge(i, j)] = None
    return NGraph(pixels, edges, "4-adjacency")


def construct_4adjacency(grid: GridField) -> NGraph:
    return grid_adjacency(field_cells(grid))


def _as_points(data) -> tuple[tuple[SpatialObject, ...], np.ndarray]:
    if isinstance(data, PointSet):
        nodes = tuple(data.objects())
        return nodes, np.asarray(data.points, dtype=float)
    nodes = tuple(data)
    if not nodes:
        return nodes, np.zeros((0, 2))
    coords = np.array([o.location for o in nodes], dtype=float)
    return nodes, coords


def construct_knn(points, k: int, metric: str | Metric = "euclidean") -> NGraph:
    """Undirected union of each node's k nearest neighbors (ties: lower index)."""
    nodes, coords = _as_points(points)
    n = len(nodes)
    if k < 1 or k >= n:
        raise ConfigurationError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    m = get_metric(metric)
    dist = m.pairwise(coords)
    edges = {}
    for i in range(n):
        row = dist[i].copy()
        row[i] = np.inf
        for j in np.argsort(row, kind="stable")[:k]:
            edges[_edge(i, int(j))] = float(dist[i, j])
    return NGraph(nodes, edges, f"knn({k},{m.kind})")


def construct_mst(points, metric: str | Metric = "euclidean") -> NGraph:
    """Kruskal over all pairs; equal weights ordered by (min index, max index)."""
    nodes, coords = _as_points(points)
    n = len(nodes)
    m = get_metric(metric)
    if n < 2:
        return NGraph(nodes, {}, f"mst({m.kind})")
    dist = m.pairwise(coords)
    iu, ju = np.triu_indices(n, k=1)
    w = dist[iu, ju]
    order = np.lexsort((ju, iu, w))
    uf = UnionFind(n)
    edges = {}
    for idx in order:
        i, j = int(iu[idx]), int(ju[idx])
        if uf.union(i, j):
            edges[(i, j)] = float(w[idx])
            if len(edges) == n - 1:
                break
    return NGraph(nodes, edges, f"mst({m.kind})")


def _incircle(a, b, c, d) -> float:
    """> 0 iff d lies inside the circumcircle of the counter-clockwise triangle abc."""
    m = np.array(
        [
            [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
            [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
            [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
        ]
    )
    return float(np.linalg.det(m))


def _orient(a, b, c) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def normalize_coords(coords: np.ndarray) -> np.ndarray:
    """Translate to the origin and scale the bounding box to unit size."""
    coords = np.asarray(coords, dtype=float)
    lo = coords.min(axis=0)
    extent = float(np.max(coords.max(axis=0) - lo))
    return (coords - lo) / (extent if extent > 0 else 1.0)


def delaunay_triangles(coords: np.ndarray) -> list[tuple[int, int, int]]:
    """Counter-clockwise Delaunay triangles with a canonical cocircular choice.

    Qhull supplies the triangulation. Where four points are cocircular the
    shared diagonal is flipped, if needed, to the one touching the lowest
    index of the four; each flip lowers the sum of edge minimum indices, so
    the pass terminates.
    """
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ConfigurationError("Delaunay triangulation is 2-D only")
    if n < 3:
        raise DegeneracyError(f"need at least 3 points, got {n}")
    if len(np.unique(coords, axis=0)) != n:
        raise DuplicatePointError("duplicate points in Delaunay input")
    norm = normalize_coords(coords)
    centered = norm - norm.mean(axis=0)
    if np.linalg.svd(centered, compute_uv=False)[-1] <= EPS:
        raise DegeneracyError("all points are collinear")
    tri = Delaunay(norm)
    tris = set()
    for s in tri.simplices:
        a, b, c = (int(v) for v in s)
        if _orient(norm[a], norm[b], norm[c]) < 0:
            b, c = c, b
        tris.add((a, b, c))

    def edge_map(triangles):
        em: dict[Edge, list[tuple[int, int, int]]] = {}
        for t in triangles:
            for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                em.setdefault(_edge(u, v), []).append(t)
        return em

    changed = True
    while changed:
        changed = False
        em = edge_map(tris)
        for (a, b), ts in sorted(em.items()):
            if len(ts) != 2:
                continue
            c = next(v for v in ts[0] if v not in (a, b))
            d = next(v for v in ts[1] if v not in (a, b))
            if min(c, d) >= min(a, b):
                continue
            t0 = ts[0]
            if abs(_incircle(norm[t0[0]], norm[t0[1]], norm[t0[2]], norm[d])) > EPS:
                continue
            # flip (a, b) -> (c, d); the quad is convex when its diagonals cross
            if _orient(norm[c], norm[d], norm[a]) * _orient(norm[c], norm[d], norm[b]) >= 0:
                continue
            tris.discard(ts[0])
            tris.discard(ts[1])
            for t in ((c, d, a), (c, d, b)):
                x, y, z = t
                if _orient(norm[x], norm[y], norm[z]) < 0:
                    y, z = z, y
                tris.add((x, y, z))
            changed = True
            break
    return sorted(tris)


def construct_delaunay(points) -> NGraph:
    nodes, coords = _as_points(points)
    if len(nodes) and coords.shape[1] != 2:
        raise ConfigurationError("Delaunay triangulation is 2-D only")
    edges = {}
    for a, b, c in delaunay_triangles(coords):
        for u, v in ((a, b), (b, c), (c, a)):
            e = _edge(u, v)
            edges[e] = float(np.linalg.norm(coords[e[0]] - coords[e[1]]))
    return NGraph(nodes, edges, "delaunay")


# -- generic routines ------------------------------------------------------

def graph_map(g: NGraph, proc: Callable[..., SpatialObject], with_index: bool = False) -> NGraph:
    """Replace every node by ``proc(node)`` (or ``proc(node, i, g)``); topology unchanged."""
    if with_index:
        nodes = tuple(proc(o, i, g) for i, o in enumerate(g.nodes))
    else:
        nodes = tuple(proc(o) for o in g.nodes)
    return NGraph(nodes, g.edges, g.provenance)


def graph_filter(g: NGraph, mask: Callable[[SpatialObject], bool]) -> NGraph:
    """Induced subgraph on nodes passing ``mask``.

    Surviving nodes keep their index in the original graph as the
    ``source_index`` property (an existing value is never overwritten).
    """
    keep = [i for i, o in enumerate(g.nodes) if mask(o)]
    pos = {old: new for new, old in enumerate(keep)}
    nodes = tuple(
        g.nodes[i] if "source_index" in g.nodes[i].props else g.nodes[i].with_props(source_index=i)
        for i in keep
    )
    edges = {(pos[i], pos[j]): w for (i, j), w in g.edges.items() if i in pos and j in pos}
    return NGraph(nodes, edges, g.provenance)


def connected_components(
    g: NGraph, edge_pred: Callable[[int, int], bool] | None = None
) -> Partition:
    """Maximal sets connected through edges accepted by ``edge_pred``."""
    n = len(g)
    class_of = [-1] * n
    for start in range(n):
        if class_of[start] >= 0:
            continue
        class_of[start] = start
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if class_of[v] < 0 and (edge_pred is None or edge_pred(min(u, v), max(u, v))):
                    class_of[v] = start
                    queue.append(v)
    return Partition.from_class_of(class_of)


def _nearby_edges(g: NGraph, e: Edge, depth: int) -> set[Edge]:
    found: set[Edge] = set()
    for root in e:
        seen = {e[0], e[1]}
        frontier = [root]
        for _ in range(depth):
            nxt = []
            for u in frontier:
                for v in g.adjacency[u]:
                    f = _edge(u, v)
                    if f == e:
                        continue
                    found.add(f)
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
    return found


def inconsistent_edges(
    tree: NGraph, k_sigma: float = 2.0, depth: int = 2, min_ratio: float = 1.0
) -> frozenset[Edge]:
    """Edges much longer than the edges around them.

    Edge e is flagged when its weight exceeds both ``mean + k_sigma * std``
    and ``min_ratio * mean`` of the edges within ``depth`` hops of its
    endpoints (e itself excluded). With fewer than two nearby edges there is
    nothing to compare against and e is kept.
    """
    flagged = set()
    for e, w in tree.edges.items():
        if w is None:
            raise ValueError("inconsistent_edges needs a weighted graph")
        nearby = [tree.edges[f] for f in _nearby_edges(tree, e, depth)]
        if len(nearby) < 2:
            continue
        mean = float(np.mean(nearby))
        std = float(np.std(nearby))
        if w > mean + k_sigma * std and w > min_ratio * mean:
            flagged.add(e)
    return frozenset(flagged)


def canonical_form(g: NGraph) -> tuple[tuple, frozenset]:
    """Nodes sorted by geometry, edges re-expressed in that order.

    Two graphs built from permutations of the same objects have equal
    canonical forms.
    """
    order = sorted(range(len(g)), key=lambda i: (g.nodes[i].kind, g.nodes[i].geom))
    rank = {old: new for new, old in enumerate(order)}
    nodes = tuple((g.nodes[i].kind, g.nodes[i].geom) for i in order)
    edges = frozenset(_edge(rank[i], rank[j]) for i, j in g.edges)
    return nodes, edges
