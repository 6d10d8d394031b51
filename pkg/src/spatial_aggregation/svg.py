"""Deterministic SVG rendering of segments, contours and N-graphs.

Presentation only: nothing here carries data that the JSON output lacks.
Pixel objects use (row, col) coordinates and are drawn with x = col, y = row.
"""

from __future__ import annotations

from typing import Iterable, Sequence
from xml.sax.saxutils import quoteattr

from .ngraph import NGraph
from .objects import SpatialObject

MARGIN = 0.05


def _fmt(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _xy(p, pixel_coords: bool) -> tuple[float, float]:
    return (float(p[1]), float(p[0])) if pixel_coords else (float(p[0]), float(p[1]))


def _view_box(points: Sequence[tuple[float, float]]) -> str:
    if not points:
        return "0 0 1 1"
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    w = max(xs) - min(xs)
    h = max(ys) - min(ys)
    mx = MARGIN * (w if w > 0 else 1.0)
    my = MARGIN * (h if h > 0 else 1.0)
    return " ".join(_fmt(v) for v in (min(xs) - mx, min(ys) - my, w + 2 * mx, h + 2 * my))


def _path(points, closed: bool) -> str:
    if not points:
        return ""
    d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in points)
    return d + (" Z" if closed else "")


def emit_svg(
    segments: Iterable[SpatialObject] = (),
    contours: Iterable[SpatialObject] = (),
    graph: NGraph | None = None,
    pixel_coords: bool = True,
) -> str:
    body: list[str] = []
    all_pts: list[tuple[float, float]] = []
    for i, s in enumerate(segments):
        pts = [_xy(p, pixel_coords) for p in s.geom]
        all_pts += pts
        cls = "segment junction" if s.props.get("junction") else "segment"
        body.append(
            f'<path class={quoteattr(cls)} id="segment-{i}" d={quoteattr(_path(pts, False))} '
            'fill="none" stroke="#888" stroke-width="0.3"/>'
        )
    for i, c in enumerate(contours):
        pts = [_xy(p, pixel_coords) for p in c.geom]
        all_pts += pts
        legal = "legal" if c.props.get("legal") else "illegal"
        body.append(
            f'<path class={quoteattr(f"contour contour-{i} {legal}")} id="contour-{i}" '
            f'd={quoteattr(_path(pts, bool(c.props.get("closed"))))} fill="none" stroke-width="0.2"/>'
        )
    if graph is not None:
        coords = []
        for o in graph.nodes:
            p = o.geom if o.kind in ("pixel", "point") else o.location
            coords.append(_xy(p, pixel_coords))
        all_pts += coords
        for (i, j), w in graph.edges.items():
            (x1, y1), (x2, y2) = coords[i], coords[j]
            body.append(
                f'<line class="edge" data-i="{i}" data-j="{j}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="black" stroke-width="0.01"/>'
            )
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_view_box(all_pts)}">\n'
    )
    return head + "".join(f"  {line}\n" for line in body) + "</svg>\n"
