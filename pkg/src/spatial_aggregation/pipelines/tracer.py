"""Boundary tracer for line drawings on a binary bitmap.

Layer 1 groups 4-adjacent foreground pixels into boundary segments, cutting
at junctions (one-valued pixels with more than two one-valued neighbors).
Layer 2 links segments whose pixels come within ``separation`` of each other
and merges colinear neighbors into contours. A contour is legal when it is
closed and does not cross itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import operators as ops
from ..errors import ConfigurationError, FieldError, IllFormedError
from ..field import GridField, field_cells
from ..geometry import FOUR_NEIGHBORS
from ..ngraph import NGraph
from ..objects import SpatialObject, to_jsonable
from .layer import Layer, LayerResult, run_layers


@dataclass(frozen=True)
class TracerParams:
    threshold1: float = 0.5
    threshold2: float = 0.5
    separation: float = 2.5
    delta: float = 2.5
    epsilon: float = 30.0
    tangent_window: int = 3

    def __post_init__(self):
        for name in ("threshold1", "threshold2", "separation", "delta", "epsilon"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 < self.epsilon < 90:
            raise ConfigurationError("epsilon must lie in (0, 90) degrees")
        if self.tangent_window < 2:
            raise ConfigurationError("tangent_window must be at least 2")


# -- layer 1: pixels -> segments ------------------------------------------

def _cell(p) -> tuple[int, int]:
    return p.geom if isinstance(p, SpatialObject) else (int(p[0]), int(p[1]))


def is_junction(p, grid: GridField) -> bool:
    """A one-valued pixel with more than two one-valued 4-neighbors."""
    r, c = _cell(p)
    if grid.value(r, c) != 1:
        return False
    ones = sum(
        1
        for dr, dc in FOUR_NEIGHBORS
        if grid.in_bounds(r + dr, c + dc) and grid.value(r + dr, c + dc) == 1
    )
    return ones > 2


def find_junctions(grid: GridField) -> list[tuple[int, int]]:
    return [(r, c) for r in range(grid.height) for c in range(grid.width) if is_junction((r, c), grid)]


def pixel_dissimilarity(n1: SpatialObject, n2: SpatialObject) -> float:
    if (
        not n1.props.get("junction")
        and not n2.props.get("junction")
        and n1.props["value"] == n2.props["value"]
    ):
        return 0.0
    return 1.0


PIXEL_RULES = ops.RuleSet(
    "pixel-classes",
    (
        ops.Rule("junction", lambda px: len(px) == 1 and px[0].props.get("junction", False), "junction"),
        ops.Rule("foreground", lambda px: px[0].props["value"] == 1, "boundary"),
        ops.Rule("background", lambda px: True, "background"),
    ),
)


def _collinear(pts: np.ndarray) -> bool:
    if len(pts) <= 2:
        return True
    d = pts[-1] - pts[0]
    norm = math.hypot(*d)
    if norm == 0:
        return False
    resid = np.abs((pts[:, 0] - pts[0, 0]) * d[1] - (pts[:, 1] - pts[0, 1]) * d[0]) / norm
    return bool(resid.max() <= 1e-9)


def end_tangent(points, window: int = 3) -> tuple[float, float] | None:
    """Outward unit tangent at ``points[0]``.

    Least-squares direction of the straight run of up to ``window`` pixels
    starting at the end; a corner inside the window shortens the run so the
    estimate follows the final straight stretch.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return None
    k = min(window, len(pts))
    while k > 2 and not _collinear(pts[:k]):
        k -= 1
    run = pts[:k]
    centered = run - run.mean(axis=0)
    direction = np.linalg.svd(centered)[2][0]
    if np.dot(direction, run[0] - run.mean(axis=0)) < 0:
        direction = -direction
    return (float(direction[0]) + 0.0, float(direction[1]) + 0.0)


def walk_path(sub: NGraph) -> list[int]:
    """Order a path- or cycle-shaped class from its lowest-index end."""
    n = len(sub)
    if n == 0:
        return []
    ends = [i for i in range(n) if sub.degree(i) <= 1]
    start = ends[0] if ends else 0
    order, seen = [start], {start}
    while True:
        nxt = [v for v in sub.neighbors(order[-1]) if v not in seen]
        if not nxt:
            break
        order.append(nxt[0])
        seen.add(nxt[0])
    if len(order) != n:
        raise IllFormedError(f"pixel class of size {n} is not a simple path")
    return order


def segment_create(window: int = 3):
    def create(sub: NGraph, label: str) -> SpatialObject:
        order = walk_path(sub)
        pts = tuple(sub.nodes[i].geom for i in order)
        closed = (
            len(pts) >= 4
            and all(sub.degree(i) == 2 for i in range(len(sub)))
            and abs(pts[0][0] - pts[-1][0]) + abs(pts[0][1] - pts[-1][1]) == 1
        )
        return SpatialObject(
            "segment",
            pts,
            {
                "n_pixels": len(pts),
                "junction": label == "junction",
                "closed": closed,
                "head_tangent": end_tangent(pts, window),
                "tail_tangent": end_tangent(pts[::-1], window),
            },
        )

    return create


# -- layer 2: segments -> contours ----------------------------------------

def _angle_mod180(t1, t2) -> float:
    cos = abs(t1[0] * t2[0] + t1[1] * t2[1])
    return math.degrees(math.acos(min(1.0, cos)))


def _ends(s: SpatialObject):
    return ((s.geom[0], s.props["head_tangent"]), (s.geom[-1], s.props["tail_tangent"]))


def segment_colinear(s1: SpatialObject, s2: SpatialObject, delta: float, epsilon: float) -> bool:
    """Some pair of end points lies within ``delta`` with tangents within ``epsilon`` degrees."""
    if len(s1.geom) < 2 or len(s2.geom) < 2:
        return False
    for p1, t1 in _ends(s1):
        for p2, t2 in _ends(s2):
            if math.dist(p1, p2) <= delta and _angle_mod180(t1, t2) <= epsilon:
                return True
    return False


def colinear_dissimilarity(params: TracerParams):
    def proc(s1: SpatialObject, s2: SpatialObject) -> float:
        if (
            len(s1.geom) > 1
            and len(s2.geom) > 1
            and segment_colinear(s1, s2, params.delta, params.epsilon)
        ):
            return 0.0
        return 1.0

    return proc


SEGMENT_RULES = ops.RuleSet(
    "segment-classes",
    (
        ops.Rule("contour", lambda segs: any(len(s.geom) > 1 for s in segs), "contour"),
        ops.Rule("junction", lambda segs: all(s.props.get("junction") for s in segs), "junction"),
        ops.Rule("dot", lambda segs: True, "dot"),
    ),
)


def chain_segments(segs: list[SpatialObject], gap: float) -> tuple[list[tuple], list[int], bool]:
    """Join segments end to end, nearest free end first.

    Returns the concatenated vertex list, the segment order used, and whether
    the chain closes back on its start within ``gap``.
    """
    if len(segs) == 1:
        s = segs[0]
        return list(s.geom), [0], bool(s.props.get("closed"))
    order = [0]
    pts = list(segs[0].geom)
    used = {0}
    while len(used) < len(segs):
        tail = pts[-1]
        best = None
        for k, s in enumerate(segs):
            if k in used:
                continue
            for flip, end in ((False, s.geom[0]), (True, s.geom[-1])):
                key = (math.dist(tail, end), k, flip)
                if best is None or key < best:
                    best = key
        dist, k, flip = best
        if dist > gap:
            return pts, order, False
        used.add(k)
        order.append(k)
        pts.extend(segs[k].geom[::-1] if flip else segs[k].geom)
    return pts, order, math.dist(pts[-1], pts[0]) <= gap


def contour_create(params: TracerParams):
    def create(sub: NGraph, label: str) -> SpatialObject:
        segs = list(sub.nodes)
        pts, order, closed = chain_segments(segs, params.separation)
        return SpatialObject(
            "contour",
            tuple(pts),
            {"closed": closed, "segment_order": [segs[k].props.get("class_id") for k in order]},
        )

    return create


# -- pipeline --------------------------------------------------------------

def tracer_layers(params: TracerParams) -> tuple[Layer, Layer]:
    pixels_to_segments = Layer(
        name="pixels->segments",
        combiner="4-adjacency",
        cluster_proc=pixel_dissimilarity,
        threshold=params.threshold1,
        class_rules=PIXEL_RULES,
        keep=("boundary", "junction"),
        desc_type=segment_create(params.tangent_window),
    )
    segments_to_contours = Layer(
        name="segments->contours",
        combiner="near",
        combiner_params={"separation": params.separation},
        cluster_proc=colinear_dissimilarity(params),
        threshold=params.threshold2,
        class_rules=SEGMENT_RULES,
        keep=("contour",),
        desc_type=contour_create(params),
    )
    return pixels_to_segments, segments_to_contours


@dataclass(eq=False)
class TraceResult:
    junctions: list[tuple[int, int]]
    segments: list[SpatialObject]
    contours: list[SpatialObject]
    layers: list[LayerResult] = field(repr=False, default_factory=list)

    @property
    def multi_pixel_segments(self) -> list[SpatialObject]:
        return [s for s in self.segments if len(s.geom) > 1]

    @property
    def legal_contours(self) -> list[SpatialObject]:
        return [c for c in self.contours if c.props["legal"]]

    def summary(self) -> str:
        return (
            f"contours={len(self.contours)} legal={len(self.legal_contours)} "
            f"segments={len(self.multi_pixel_segments)} junctions={len(self.junctions)}"
        )

    def to_dict(self) -> dict:
        return {
            "junctions": [list(j) for j in self.junctions],
            "segments": [
                {
                    "id": i,
                    "pixels": to_jsonable(s.geom),
                    "junction": s.props["junction"],
                    "closed": s.props["closed"],
                    "head_tangent": to_jsonable(s.props["head_tangent"]),
                    "tail_tangent": to_jsonable(s.props["tail_tangent"]),
                }
                for i, s in enumerate(self.segments)
            ],
            "contours": [
                {
                    "segments": list(c.props["members"]),
                    "order": [self._segment_index(cid) for cid in c.props["segment_order"]],
                    "points": to_jsonable(c.geom),
                    "closed": c.props["closed"],
                    "legal": c.props["legal"],
                }
                for c in self.contours
            ],
        }

    def _segment_index(self, class_id: int) -> int:
        for i, s in enumerate(self.segments):
            if s.props["class_id"] == class_id:
                return i
        raise KeyError(class_id)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _check_binary(grid: GridField) -> None:
    if grid.channels != 1:
        raise FieldError("boundary tracing needs a single-channel grid")
    if not np.all((grid.values == 0) | (grid.values == 1)):
        raise FieldError("boundary tracing needs a binary (0/1) grid")


def trace_boundaries(grid: GridField, params: TracerParams | None = None) -> TraceResult:
    params = params or TracerParams()
    _check_binary(grid)
    junctions = set(find_junctions(grid))
    pixels = [p.with_props(junction=p.geom in junctions) for p in field_cells(grid)]
    layer1, layer2 = run_layers(pixels, tracer_layers(params))
    contours = [c.with_props(legal=ops.consistent(c, ops.CONTOUR_RULES)) for c in layer2.objects]
    return TraceResult(sorted(junctions), layer1.objects, contours, [layer1, layer2])


def tracer_params_dict(params: TracerParams) -> dict:
    return asdict(params)
