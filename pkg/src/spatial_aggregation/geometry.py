"""Task-independent geometric routines used by the generic operators.

Regions are either pixel sets (integer ``(row, col)`` cells) or simple
polygons. Polylines are ordered 2-D vertex lists, open or closed.
All predicates share one tolerance, ``EPS``, meant for coordinates that have
been normalised to roughly unit scale.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy.spatial.distance import cdist
from shapely.geometry import LineString, Polygon

from .errors import ConfigurationError, IllFormedError

EPS = 1e-9

Point = tuple[float, float]
Cell = tuple[int, int]

FOUR_NEIGHBORS = ((-1, 0), (0, 1), (1, 0), (0, -1))


# -- types -----------------------------------------------------------------

@dataclass(frozen=True)
class Polyline:
    points: tuple[Point, ...]
    closed: bool = False

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if self.closed and len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        need = 3 if self.closed else 2
        if len(pts) < need:
            kind = "closed" if self.closed else "open"
            raise IllFormedError(f"an {kind} polyline needs at least {need} points")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise IllFormedError(f"consecutive duplicate vertex {a}")
        if self.closed and pts[0] == pts[-1]:
            raise IllFormedError("closing vertex repeats the first")
        object.__setattr__(self, "points", pts)

    def edges(self) -> list[tuple[Point, Point]]:
        pts = self.points
        out = list(zip(pts, pts[1:]))
        if self.closed:
            out.append((pts[-1], pts[0]))
        return out


@dataclass(frozen=True)
class Region:
    """A pixel set or a simple polygon (counter-clockwise vertices)."""

    kind: str
    pixels: frozenset[Cell] = frozenset()
    vertices: tuple[Point, ...] = ()

    def __post_init__(self):
        if self.kind not in ("pixels", "polygon"):
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def from_pixels(cls, cells: Iterable[Sequence[int]]) -> "Region":
        return cls("pixels", pixels=frozenset((int(r), int(c)) for r, c in cells))

    @classmethod
    def polygon(cls, vertices: Iterable[Sequence[float]]) -> "Region":
        pts = [(float(x), float(y)) for x, y in vertices]
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts.pop()
        if len(pts) < 3:
            raise IllFormedError("a polygon needs at least 3 vertices")
        if _signed_area(pts) < 0:
            pts.reverse()
        return cls("polygon", vertices=tuple(pts))

    @property
    def is_empty(self) -> bool:
        return not (self.pixels or self.vertices)

    def shape(self) -> Polygon:
        if self.kind != "polygon":
            raise TypeError("only polygon regions have a shapely form")
        return Polygon(self.vertices)


EMPTY_REGION = Region("pixels")


@dataclass(frozen=True)
class Mask:
    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float)
        if arr.ndim != 2:
            raise ConfigurationError("a mask must be a 2-D array")
        if arr.shape[0] % 2 == 0 or arr.shape[1] % 2 == 0:
            raise ConfigurationError(f"mask dimensions must be odd, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def center(self) -> tuple[int, int]:
        return self.coefficients.shape[0] // 2, self.coefficients.shape[1] // 2


@dataclass(frozen=True)
class Intersection:
    points: tuple[Point, ...] = ()
    segments: tuple[tuple[Point, Point], ...] = ()
    regions: tuple[Region, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not (self.points or self.segments or self.regions)

    @property
    def area(self) -> float:
        return sum(region_area(r) for r in self.regions)


# -- object coordinates ----------------------------------------------------

def object_points(obj) -> np.ndarray:
    """Coordinates of every sample making up a spatial object."""
    geom = obj.geom
    if geom and isinstance(geom[0], (tuple, list)):
        return np.array(geom, dtype=float)
    return np.array([geom], dtype=float)


def min_separation(a, b) -> float:
    """Smallest Euclidean distance between any sample of ``a`` and any of ``b``."""
    return float(cdist(object_points(a), object_points(b)).min())


# -- primitive predicates --------------------------------------------------

def _signed_area(pts: Sequence[Point]) -> float:
    s = 0.0
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s / 2.0


def cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: Point, a: Point, b: Point, eps: float = EPS) -> bool:
    if abs(cross(a, b, p)) > eps * max(1.0, math.dist(a, b)):
        return False
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Intersection:
    """Intersection of closed segments ab and cd: empty, a point, or an overlap."""
    a, b, c, d = (tuple(map(float, p)) for p in (a, b, c, d))
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = r[0] * s[1] - r[1] * s[0]
    qp = (c[0] - a[0], c[1] - a[1])
    scale = max(1.0, math.hypot(*r) * math.hypot(*s))
    if abs(denom) <= EPS * scale:
        if abs(qp[0] * r[1] - qp[1] * r[0]) > EPS * max(1.0, math.hypot(*r)):
            return Intersection()
        # collinear: project cd onto ab
        rr = r[0] * r[0] + r[1] * r[1]
        if rr == 0:
            return Intersection(points=(a,)) if _on_segment(a, c, d) else Intersection()
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
        if lo > hi + EPS:
            return Intersection()
        p = (a[0] + lo * r[0], a[1] + lo * r[1])
        q = (a[0] + hi * r[0], a[1] + hi * r[1])
        if math.dist(p, q) <= EPS:
            return Intersection(points=(p,))
        return Intersection(segments=(tuple(sorted((p, q))),))
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
        return Intersection(points=((a[0] + t * r[0], a[1] + t * r[1]),))
    return Intersection()


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    return not segment_intersection(a, b, c, d).is_empty


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    """Even-odd rule; points on the boundary are *not* inside."""
    x, y = p
    n = len(vertices)
    for i in range(n):
        if _on_segment((x, y), vertices[i], vertices[(i + 1) % n]):
            return False
    inside = False
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xs:
                inside = not inside
    return inside


def self_intersecting(line: Polyline) -> bool:
    """True if two non-adjacent edges touch, or adjacent edges fold back."""
    edges = line.edges()
    m = len(edges)
    for i in range(m):
        a, b = edges[i]
        for j in range(i + 1, m):
            c, d = edges[j]
            adjacent = j == i + 1 or (line.closed and i == 0 and j == m - 1)
            if adjacent:
                # shared vertex is expected; anything more is a fold
                hit = segment_intersection(a, b, c, d)
                if hit.segments:
                    return True
                continue
            if segments_intersect(a, b, c, d):
                return True
    return False


# -- intrinsic geometry ----------------------------------------------------

def region_area(region: Region) -> float:
    if region.kind == "pixels":
        return float(len(region.pixels))
    return abs(_signed_area(region.vertices))


def _pixel_perimeter(cells: frozenset[Cell]) -> float:
    return float(
        sum(1 for r, c in cells for dr, dc in FOUR_NEIGHBORS if (r + dr, c + dc) not in cells)
    )


def _polygon_centroid(pts: Sequence[Point]) -> Point:
    a = _signed_area(pts)
    if a == 0:
        arr = np.array(pts)
        return tuple(arr.mean(axis=0))
    cx = cy = 0.0
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        f = x1 * y2 - x2 * y1
        cx += (x1 + x2) * f
        cy += (y1 + y2) * f
    return (cx / (6 * a), cy / (6 * a))


def circumradius_curvature(a: Point, b: Point, c: Point) -> float:
    """1 / radius of the circle through three points (0 when collinear)."""
    ab, bc, ca = math.dist(a, b), math.dist(b, c), math.dist(c, a)
    if ab * bc * ca == 0:
        return 0.0
    return 2.0 * abs(cross(a, b, c)) / (ab * bc * ca)


def _polyline_curvature(line: Polyline) -> list[float]:
    pts = line.points
    n = len(pts)
    if line.closed:
        return [circumradius_curvature(pts[i - 1], pts[i], pts[(i + 1) % n]) for i in range(n)]
    return [circumradius_curvature(pts[i - 1], pts[i], pts[i + 1]) for i in range(1, n - 1)]


_POLYLINE_PROPS = ("length", "curvature")
_REGION_PROPS = ("area", "perimeter", "centroid")


def intrinsic_geometry(obj: Polyline | Region, properties: Iterable[str]) -> dict:
    """Requested intrinsic properties.

    Polylines: ``length``, per-vertex ``curvature`` (interior vertices only
    for open lines). Regions: ``area``, ``perimeter``, ``centroid``.
    """
    props = list(properties)
    out = {}
    if isinstance(obj, Polyline):
        bad = [p for p in props if p not in _POLYLINE_PROPS]
        if bad:
            raise ConfigurationError(f"undefined for polylines: {bad}")
        for p in props:
            if p == "length":
                out[p] = sum(math.dist(a, b) for a, b in obj.edges())
            else:
                out[p] = _polyline_curvature(obj)
        return out
    if isinstance(obj, Region):
        bad = [p for p in props if p not in _REGION_PROPS]
        if bad:
            raise ConfigurationError(f"undefined for regions: {bad}")
        for p in props:
            if p == "area":
                out[p] = region_area(obj)
            elif p == "perimeter":
                if obj.kind == "pixels":
                    out[p] = _pixel_perimeter(obj.pixels)
                else:
                    out[p] = sum(math.dist(a, b) for a, b in Polyline(obj.vertices, True).edges())
            else:
                if obj.kind == "pixels":
                    out[p] = tuple(np.array(sorted(obj.pixels), dtype=float).mean(axis=0))
                else:
                    out[p] = _polygon_centroid(obj.vertices)
        return out
    raise ConfigurationError(f"no intrinsic geometry for {type(obj).__name__}")


# -- containment, intersection, contiguity --------------------------------

def _interior_pixels(cells: frozenset[Cell]) -> frozenset[Cell]:
    return cells - boundary(Region("pixels", pixels=cells)).pixels


def contain(outer: Region, inner) -> bool:
    """True iff every point of ``inner`` lies in the interior of ``outer``."""
    if outer.is_empty:
        return False
    if outer.kind == "pixels":
        interior = _interior_pixels(outer.pixels)
        if isinstance(inner, Region):
            if inner.kind != "pixels":
                raise ConfigurationError("mixed pixel/polygon containment is not defined")
            return bool(inner.pixels) and inner.pixels <= interior
        cell = tuple(inner)
        return all(float(v).is_integer() for v in cell) and (int(cell[0]), int(cell[1])) in interior
    if isinstance(inner, Region):
        if inner.kind != "polygon":
            raise ConfigurationError("mixed pixel/polygon containment is not defined")
        return bool(outer.shape().contains_properly(inner.shape()))
    if isinstance(inner, Polyline):
        return bool(outer.shape().contains_properly(LineString(inner.points)))
    return point_in_polygon(tuple(map(float, inner)), outer.vertices)


def _shapely_regions(geom) -> tuple[Region, ...]:
    out = []
    for part in getattr(geom, "geoms", [geom]):
        if isinstance(part, Polygon) and not part.is_empty and part.area > 0:
            out.append(Region.polygon(list(part.exterior.coords)))
    return tuple(sorted(out, key=lambda r: r.vertices))


def _shapely_segments(geom) -> tuple[tuple[Point, Point], ...]:
    out = []
    for part in getattr(geom, "geoms", [geom]):
        if isinstance(part, LineString) and not part.is_empty:
            coords = list(part.coords)
            for a, b in zip(coords, coords[1:]):
                out.append(tuple(sorted((tuple(a), tuple(b)))))
    return tuple(sorted(out))


def intersect(a, b) -> Intersection:
    """Intersection of two polylines, two regions, or a polyline and a region."""
    if isinstance(a, Region) and isinstance(b, Region):
        if a.kind == "pixels" and b.kind == "pixels":
            common = a.pixels & b.pixels
            return Intersection(regions=(Region("pixels", pixels=common),) if common else ())
        if a.kind == "polygon" and b.kind == "polygon":
            return Intersection(regions=_shapely_regions(a.shape().intersection(b.shape())))
        raise ConfigurationError("mixed pixel/polygon intersection is not defined")
    if isinstance(a, Polyline) and isinstance(b, Polyline):
        points, segments = set(), set()
        for p, q in a.edges():
            for r, s in b.edges():
                hit = segment_intersection(p, q, r, s)
                points.update(_round_pt(x) for x in hit.points)
                segments.update(tuple(_round_pt(x) for x in seg) for seg in hit.segments)
        # drop points already covered by an overlap segment
        points = {p for p in points if not any(_on_segment(p, *seg) for seg in segments)}
        return Intersection(points=tuple(sorted(points)), segments=tuple(sorted(segments)))
    if isinstance(a, Region) and isinstance(b, Polyline):
        a, b = b, a
    if isinstance(a, Polyline) and isinstance(b, Region) and b.kind == "polygon":
        line = LineString(a.points + ((a.points[0],) if a.closed else ()))
        return Intersection(segments=_shapely_segments(line.intersection(b.shape())))
    raise ConfigurationError(f"cannot intersect {type(a).__name__} with {type(b).__name__}")


def _round_pt(p: Point) -> Point:
    # snaps the same crossing computed from either argument order onto one value
    return (round(p[0], 9) + 0.0, round(p[1], 9) + 0.0)


def contiguous(a: Region, b: Region) -> bool:
    """Closure of one region meets the other (pixel: equal or 4-adjacent cells)."""
    if a.is_empty or b.is_empty:
        return False
    if a.kind == "pixels" and b.kind == "pixels":
        small, large = (a.pixels, b.pixels) if len(a.pixels) <= len(b.pixels) else (b.pixels, a.pixels)
        return any(
            (r + dr, c + dc) in large
            for r, c in small
            for dr, dc in ((0, 0),) + FOUR_NEIGHBORS
        )
    if a.kind == "polygon" and b.kind == "polygon":
        return bool(shapely.distance(a.shape(), b.shape()) <= EPS)
    raise ConfigurationError("mixed pixel/polygon contiguity is not defined")


# -- boundary and coboundary ----------------------------------------------

def boundary(region: Region) -> Region | Polyline:
    """Pixels with a non-region 4-neighbor, or a polygon's closed edge cycle."""
    if region.is_empty:
        return EMPTY_REGION
    if region.kind == "pixels":
        cells = region.pixels
        edge = {
            (r, c)
            for r, c in cells
            if any((r + dr, c + dc) not in cells for dr, dc in FOUR_NEIGHBORS)
        }
        return Region("pixels", pixels=frozenset(edge))
    return Polyline(region.vertices, closed=True)


def is_closed_pixel_curve(cells: frozenset[Cell]) -> bool:
    """A simple closed 4-curve: connected, every cell with exactly two curve 4-neighbors."""
    if len(cells) < 4:
        return False
    for r, c in cells:
        if sum((r + dr, c + dc) in cells for dr, dc in FOUR_NEIGHBORS) != 2:
            return False
    start = next(iter(cells))
    seen = {start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in FOUR_NEIGHBORS:
            nb = (r + dr, c + dc)
            if nb in cells and nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == len(cells)


def fill_pixel_curve(cells: frozenset[Cell]) -> frozenset[Cell]:
    """Curve plus everything the exterior flood fill cannot reach."""
    rows = [r for r, _ in cells]
    cols = [c for _, c in cells]
    r0, r1, c0, c1 = min(rows) - 1, max(rows) + 1, min(cols) - 1, max(cols) + 1
    outside = {(r0, c0)}
    queue = deque(outside)
    while queue:
        r, c = queue.popleft()
        for dr, dc in FOUR_NEIGHBORS:
            nb = (r + dr, c + dc)
            if r0 <= nb[0] <= r1 and c0 <= nb[1] <= c1 and nb not in cells and nb not in outside:
                outside.add(nb)
                queue.append(nb)
    return frozenset(
        (r, c) for r in range(r0, r1 + 1) for c in range(c0, c1 + 1) if (r, c) not in outside
    )


def coboundary(curve: Polyline | Region) -> Region:
    """The region a closed, non-self-intersecting curve bounds (curve included)."""
    if isinstance(curve, Polyline):
        if not curve.closed:
            raise IllFormedError("coboundary needs a closed curve")
        if self_intersecting(curve):
            raise IllFormedError("coboundary needs a non-self-intersecting curve")
        return Region.polygon(curve.points)
    if isinstance(curve, Region) and curve.kind == "pixels":
        if not is_closed_pixel_curve(curve.pixels):
            raise IllFormedError("pixel set is not a simple closed 4-connected curve")
        return Region("pixels", pixels=fill_pixel_curve(curve.pixels))
    raise IllFormedError(f"coboundary is undefined for {type(curve).__name__}")


# -- convolution -----------------------------------------------------------

def convolve_array(values: np.ndarray, mask: Mask) -> np.ndarray:
    """out[r, c] = sum_ij mask[i, j] * in[r + i - a, c + j - b], edge-clamped.

    Accumulates mask terms in row-major order so results match a direct
    per-pixel sum bit for bit.
    """
    arr = np.asarray(values, dtype=float)
    coeffs = mask.coefficients
    a, b = mask.center
    padded = np.pad(arr, ((a, a), (b, b)), mode="edge")
    h, w = arr.shape
    out = np.zeros_like(arr)
    for i in range(coeffs.shape[0]):
        for j in range(coeffs.shape[1]):
            out += coeffs[i, j] * padded[i : i + h, j : j + w]
    return out


def convolve(grid, mask: Mask | np.ndarray):
    from .field import GridField

    if not isinstance(mask, Mask):
        mask = Mask(mask)
    if grid.channels != 1:
        raise ConfigurationError("convolve needs a single-channel field")
    return GridField.from_array(convolve_array(grid.array(), mask), spacing=grid.spacing)
