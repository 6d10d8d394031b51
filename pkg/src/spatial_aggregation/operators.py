"""Generic task-level operators, applied identically at every layer.

A layer is processed as ``aggregate -> classify -> redescribe``: build an
N-graph over the layer's objects, cut it into labelled equivalence classes,
and lift each class to one object of the next layer. ``localize``,
``search``, ``incremental_analyze`` and the two consistency predicates work
on the graphs and objects those steps produce.

Node predicates used by ``localize`` and ``search`` take ``(graph, index)``.
"""

from __future__ import annotations

import heapq
import inspect
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import ngraph as ng
from .errors import ConfigurationError, ContainmentError, ContractViolation
from .geometry import Polyline, Region, contain, self_intersecting
from .ngraph import NGraph, Partition
from .objects import SpatialObject, to_jsonable

UNCLASSIFIED = "unclassified"


# -- rules -----------------------------------------------------------------

PREDICATES: dict[str, Callable[..., bool]] = {}


def predicate(name: str):
    """Register a named predicate usable as ``Rule.when``."""

    def deco(fn):
        PREDICATES[name] = fn
        return fn

    return deco


@dataclass(frozen=True)
class Rule:
    name: str
    when: Callable[..., bool] | str
    then: Any = True

    def matches(self, *args) -> bool:
        test = self.when
        if isinstance(test, str):
            try:
                test = PREDICATES[test]
            except KeyError:
                raise ConfigurationError(f"no predicate named {test!r}") from None
        return bool(test(*args))

    def verdict(self, *args):
        return self.then(*args) if callable(self.then) else self.then


@dataclass(frozen=True)
class RuleSet:
    """Ordered production rules; the first rule whose pattern matches fires."""

    name: str
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def first(self, *args) -> Rule | None:
        for rule in self.rules:
            if rule.matches(*args):
                return rule
        return None

    def matching(self, *args) -> list[Rule]:
        return [r for r in self.rules if r.matches(*args)]


def _as_polyline(obj: SpatialObject) -> Polyline | None:
    pts = []
    for p in obj.geom:
        p = tuple(float(v) for v in p)
        if not pts or pts[-1] != p:
            pts.append(p)
    closed = bool(obj.props.get("closed", False))
    if closed and len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    try:
        return Polyline(tuple(pts), closed=closed)
    except Exception:
        return None


@predicate("curve?")
def is_curve(obj: SpatialObject) -> bool:
    return obj.kind in ("contour", "polyline", "segment") and bool(obj.geom) and isinstance(obj.geom[0], tuple)


@predicate("closed?")
def is_closed(obj: SpatialObject) -> bool:
    line = _as_polyline(obj)
    return line is not None and line.closed


@predicate("self-intersecting?")
def is_self_intersecting(obj: SpatialObject) -> bool:
    line = _as_polyline(obj)
    return line is None or self_intersecting(line)


@predicate("inside?")
def is_inside(inner: SpatialObject, outer: SpatialObject) -> bool:
    """``inner`` lies strictly inside the region bounded by closed curve ``outer``."""
    if not (is_closed(outer) and not is_self_intersecting(outer)):
        return False
    region = Region.polygon(_as_polyline(outer).points)
    line = _as_polyline(inner)
    if line is None:
        return False
    if line.closed and not self_intersecting(line):
        return contain(region, Region.polygon(line.points))
    return contain(region, line)


CONTOUR_RULES = RuleSet(
    "contour-consistency",
    (
        Rule(
            "legal-contour",
            "curve?",
            lambda c: is_closed(c) and not is_self_intersecting(c),
        ),
    ),
)

NO_CONTAINMENT = RuleSet(
    "no-containment",
    (
        Rule(
            "closed-curves-do-not-nest",
            lambda a, b: is_closed(a) and is_closed(b),
            lambda a, b: not (is_inside(a, b) or is_inside(b, a)),
        ),
    ),
)


def consistent(obj: SpatialObject, rules: RuleSet = CONTOUR_RULES) -> bool:
    """Verdict of the first matching rule; vacuously true if none matches."""
    rule = rules.first(obj)
    return True if rule is None else bool(rule.verdict(obj))


def pairwise_consistent(o1: SpatialObject, o2: SpatialObject, rules: RuleSet) -> bool:
    """Conjunction of every matching pair rule."""
    return all(bool(rule.verdict(o1, o2)) for rule in rules.matching(o1, o2))


# -- aggregate -------------------------------------------------------------

def _predicate_combiner(objects, neighbor_p, weight=None):
    return ng.construct(objects, neighbor_p, weight)


COMBINERS: dict[str, Callable[..., NGraph]] = {
    "predicate": _predicate_combiner,
    "near": lambda objects, separation, **kw: ng.construct_near(objects, separation, **kw),
    "4-adjacency": lambda objects: ng.grid_adjacency(objects),
    "knn": lambda objects, k, metric="euclidean": ng.construct_knn(objects, k, metric),
    "mst": lambda objects, metric="euclidean": ng.construct_mst(objects, metric),
    "delaunay": lambda objects: ng.construct_delaunay(objects),
}


def register_combiner(name: str, build: Callable[..., NGraph]) -> None:
    if name in COMBINERS:
        raise ConfigurationError(f"combiner {name!r} already registered")
    COMBINERS[name] = build


def aggregate(objects: Sequence[SpatialObject], combiner: str | Callable[..., NGraph], **params) -> NGraph:
    """Assemble objects into an N-graph with a registered (or given) constructor."""
    if callable(combiner):
        name = getattr(combiner, "__name__", "custom")
        build = combiner
    else:
        name = combiner
        try:
            build = COMBINERS[combiner]
        except KeyError:
            raise ConfigurationError(
                f"unknown combiner {combiner!r}; known: {', '.join(sorted(COMBINERS))}"
            ) from None
    objects = tuple(objects)
    if not objects:
        return NGraph((), {}, name)
    try:
        inspect.signature(build).bind(objects, **params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for combiner {name!r}: {exc}") from None
    g = build(objects, **params)
    if not isinstance(g, NGraph):
        raise ContractViolation(f"combiner {name!r} did not return an NGraph")
    return g


# -- classify --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LabeledPartition:
    """Labelled equivalence classes.

    ``labels`` may cover only some classes of ``partition`` (after
    :meth:`select`); those are the classes this object speaks for.
    """

    partition: Partition
    labels: Mapping[int, str]
    class_props: Mapping[int, dict] = field(default_factory=dict)

    @property
    def class_ids(self) -> list[int]:
        return list(self.labels)

    def members(self, cid: int) -> tuple[int, ...]:
        return self.partition.classes[cid]

    def select(self, keep: Callable[[int, str], bool] | Iterable[str]) -> "LabeledPartition":
        """Keep classes by label (iterable of labels) or by ``keep(cid, label)``."""
        if not callable(keep):
            wanted = set(keep)
            keep_fn = lambda cid, label: label in wanted  # noqa: E731
        else:
            keep_fn = keep
        labels = {c: l for c, l in self.labels.items() if keep_fn(c, l)}
        props = {c: p for c, p in self.class_props.items() if c in labels}
        return LabeledPartition(self.partition, labels, props)

    def to_dict(self) -> dict:
        return {
            "classes": [
                {
                    "id": cid,
                    "label": label,
                    "members": list(self.partition.classes[cid]),
                    "props": to_jsonable(self.class_props.get(cid, {})),
                }
                for cid, label in self.labels.items()
            ]
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def classify(
    g: NGraph,
    cluster_proc: Callable[[SpatialObject, SpatialObject], float],
    threshold: float,
    class_rules: RuleSet | None = None,
) -> LabeledPartition:
    """Equivalence classes = components over edges with dissimilarity <= threshold.

    Each class is labelled by the first rule of ``class_rules`` whose pattern
    matches its member list, otherwise ``"unclassified"``.
    """
    close = set()
    for i, j in g.edges:
        d = float(cluster_proc(g.nodes[i], g.nodes[j]))
        if not d >= 0:
            raise ContractViolation(f"cluster_proc returned {d} for edge ({i}, {j})")
        if d <= threshold:
            close.add((i, j))
    partition = ng.connected_components(g, lambda i, j: (i, j) in close)
    labels, props = {}, {}
    for cid, members in partition.classes.items():
        objs = [g.nodes[m] for m in members]
        rule = class_rules.first(objs) if class_rules else None
        labels[cid] = UNCLASSIFIED if rule is None else str(rule.verdict(objs))
        props[cid] = {"size": len(members)}
    return LabeledPartition(partition, labels, props)


# -- redescribe ------------------------------------------------------------

def redescribe(
    lp: LabeledPartition,
    g: NGraph,
    desc_type: Callable[[NGraph, str], SpatialObject] | Mapping[str, Callable[[NGraph, str], SpatialObject]],
) -> list[SpatialObject]:
    """Lift each class to one higher-level object.

    ``desc_type(class_subgraph, label)`` builds the object; a mapping selects
    the constructor by label. Outputs gain ``class_id``, ``label`` and
    ``members`` (node indices in ``g``) properties.
    """
    out = []
    for cid, label in lp.labels.items():
        if callable(desc_type):
            build = desc_type
        else:
            try:
                build = desc_type[label]
            except KeyError:
                raise ConfigurationError(f"no description type registered for label {label!r}") from None
        members = lp.members(cid)
        obj = build(g.subgraph(members), label)
        out.append(
            obj.with_props(
                class_id=cid, label=label, members=list(members), **lp.class_props.get(cid, {})
            )
        )
    return out


# -- localize and search ---------------------------------------------------

def localize(
    g: NGraph,
    select_proc: Callable[[NGraph, int], bool],
    enumerate_proc: Callable[[NGraph], Iterable[int]] | None = None,
) -> list[SpatialObject]:
    """Open an aggregate up: members in enumeration order that pass ``select_proc``."""
    order = range(len(g)) if enumerate_proc is None else enumerate_proc(g)
    seen = set()
    out = []
    for i in order:
        if i in seen:
            raise ContractViolation(f"enumerate_proc yielded node {i} twice")
        seen.add(i)
        if select_proc(g, i):
            out.append(g.nodes[i])
    return out


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    cost: float

    def __len__(self) -> int:
        return max(0, len(self.nodes) - 1)

    def validate(self, g: NGraph) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise ContractViolation(f"path repeats a node: {self.nodes}")
        for a, b in zip(self.nodes, self.nodes[1:]):
            if not g.has_edge(a, b):
                raise ContractViolation(f"path step {a}->{b} is not an edge")


def _walk_back(parent: dict[int, int | None], goal: int) -> tuple[int, ...]:
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def _edge_cost(g: NGraph, i: int, j: int) -> float:
    w = g.weight(i, j)
    return 1.0 if w is None else w


def _path_cost(g: NGraph, nodes: Sequence[int]) -> float:
    return float(sum(_edge_cost(g, a, b) for a, b in zip(nodes, nodes[1:])))


def search(
    g: NGraph,
    initial: Iterable[int],
    goal_p: Callable[[NGraph, int], bool],
    combiner: str = "fifo",
) -> list[Path]:
    """One path per reachable goal node, ordered by goal index.

    ``fifo`` gives fewest edges, ``priority`` least total weight (unweighted
    edges cost 1), ``lifo`` the depth-first tree path. Ties go to the lower
    node index.
    """
    starts = sorted(set(initial))
    if not starts:
        raise ConfigurationError("search needs at least one initial node")
    parent: dict[int, int | None] = {}
    if combiner == "fifo":
        queue = deque()
        for s in starts:
            parent[s] = None
            queue.append(s)
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
    elif combiner == "lifo":
        stack = [(s, None) for s in reversed(starts)]
        while stack:
            u, p = stack.pop()
            if u in parent:
                continue
            parent[u] = p
            for v in reversed(g.adjacency[u]):
                if v not in parent:
                    stack.append((v, u))
    elif combiner == "priority":
        dist = {s: 0.0 for s in starts}
        for s in starts:
            parent[s] = None
        heap = [(0.0, s) for s in starts]
        heapq.heapify(heap)
        done = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v in g.adjacency[u]:
                nd = d + _edge_cost(g, u, v)
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    parent[v] = u
                    heapq.heappush(heap, (nd, v))
    else:
        raise ConfigurationError(f"unknown search discipline {combiner!r}")
    paths = []
    for goal in sorted(parent):
        if goal_p(g, goal):
            nodes = _walk_back(parent, goal)
            paths.append(Path(nodes, _path_cost(g, nodes)))
    return paths


# -- incremental analysis --------------------------------------------------

@dataclass(frozen=True)
class TransitionReport:
    from_node: int
    to_node: int | None
    changed: bool


def region_of(obj: SpatialObject) -> Region:
    """Region occupied by a node: an explicit ``region`` prop, a polygon, or a pixel set."""
    if isinstance(obj.props.get("region"), Region):
        return obj.props["region"]
    if obj.kind in ("region", "polygon"):
        return Region.polygon(obj.geom)
    if obj.kind == "pixel":
        return Region.from_pixels([obj.geom])
    if obj.kind == "pixels":
        return Region.from_pixels(obj.geom)
    raise ConfigurationError(f"{obj.kind} objects do not occupy a region")


def _containing_node(g: NGraph, loc) -> int | None:
    for i, obj in enumerate(g.nodes):
        if contain(region_of(obj), loc):
            return i
    return None


def incremental_analyze(g: NGraph, state, delta: Sequence[float]) -> TransitionReport:
    """Which node's region a state moves into after a small state-space step."""
    loc = state.location if isinstance(state, SpatialObject) else tuple(state)
    loc = tuple(float(v) for v in loc)
    if len(delta) != len(loc):
        raise ConfigurationError("perturbation and state have different dimensions")
    start = _containing_node(g, loc)
    if start is None:
        raise ContainmentError(f"state {loc} lies in no node of the graph")
    moved = tuple(a + float(b) for a, b in zip(loc, delta))
    end = _containing_node(g, moved)
    return TransitionReport(start, end, end != start)
