"""Fields: purely numerical input with no explicit structure.

Two concrete shapes are supported: dense grids (images, bitmaps) and ordered
point sets (orbit samples). Grids are row-major with row 0 at the top, so a
bitmap printed as text reads the same way it is indexed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import distance as _sdist

from .errors import ConfigurationError, EmptyFieldError, FormatError, ParseError
from .objects import SpatialObject, pixel

__all__ = [
    "GridField",
    "PointSet",
    "Metric",
    "get_metric",
    "register_metric",
    "load_grid_text",
    "emit_grid_text",
    "load_pgm",
    "emit_pgm",
    "load_points_csv",
    "field_cells",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridField:
    width: int
    height: int
    channels: int
    values: np.ndarray
    spacing: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.channels < 1:
            raise FormatError(
                f"grid dimensions must be positive, got {self.width}x{self.height}x{self.channels}"
            )
        values = _frozen_array(np.ravel(self.values))
        if values.size != self.width * self.height * self.channels:
            raise FormatError(
                f"expected {self.width * self.height * self.channels} values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise FormatError("grid values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    @classmethod
    def from_array(cls, array, spacing=(1.0, 1.0)) -> "GridField":
        arr = np.asarray(array, dtype=float)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise FormatError(f"expected a 2-D or 3-D array, got shape {arr.shape}")
        h, w, c = arr.shape
        return cls(width=w, height=h, channels=c, values=arr.ravel(), spacing=spacing)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def array(self) -> np.ndarray:
        """(height, width) view for single-channel grids, else (h, w, c)."""
        arr = self.values.reshape(self.height, self.width, self.channels)
        return arr[:, :, 0] if self.channels == 1 else arr

    def value(self, row: int, col: int) -> float:
        if self.channels != 1:
            raise ValueError("value() is only defined for single-channel grids")
        return float(self.values[row * self.width + col])

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def __eq__(self, other):
        if not isinstance(other, GridField):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.channels == other.channels
            and self.spacing == other.spacing
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    values: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise FormatError(f"points must be an (n, 2) or (n, 3) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise FormatError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen_array(pts))
        if self.values is not None:
            vals = np.asarray(self.values, dtype=float)
            if len(vals) != len(pts):
                raise FormatError("one value vector per point is required")
            object.__setattr__(self, "values", _frozen_array(vals))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def objects(self) -> list[SpatialObject]:
        out = []
        for i, p in enumerate(self.points):
            props = {"index": i}
            if self.values is not None:
                props["value"] = self.values[i].tolist()
            out.append(SpatialObject("point", tuple(float(c) for c in p), props))
        return out


# -- metrics ---------------------------------------------------------------

@dataclass(frozen=True)
class Metric:
    kind: str
    func: Callable[[np.ndarray, np.ndarray], float] = field(compare=False)
    scipy_name: str | None = field(default=None, compare=False)

    def __call__(self, a, b) -> float:
        return float(self.func(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))

    def pairwise(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.scipy_name is not None:
            return _sdist.cdist(pts, pts, self.scipy_name)
        n = len(pts)
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = self(pts[i], pts[j])
        return d


_METRICS: dict[str, Metric] = {
    "euclidean": Metric("euclidean", lambda a, b: math.sqrt(float(np.sum((a - b) ** 2))), "euclidean"),
    "manhattan": Metric("manhattan", lambda a, b: float(np.sum(np.abs(a - b))), "cityblock"),
    "chebyshev": Metric("chebyshev", lambda a, b: float(np.max(np.abs(a - b))), "chebyshev"),
}


def register_metric(name: str, func: Callable) -> Metric:
    """Register a user metric. The caller is responsible for the metric axioms."""
    if name in _METRICS:
        raise ConfigurationError(f"metric {name!r} is already registered")
    metric = Metric(name, func)
    _METRICS[name] = metric
    return metric


def get_metric(metric: str | Metric = "euclidean") -> Metric:
    if isinstance(metric, Metric):
        return metric
    try:
        return _METRICS[metric]
    except KeyError:
        raise ConfigurationError(
            f"unknown metric {metric!r}; known: {', '.join(sorted(_METRICS))}"
        ) from None


# -- text formats ----------------------------------------------------------

def _parse_number(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"line {lineno}: not a number: {token!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"line {lineno}: non-finite value {token!r}")
    return value


def load_grid_text(text: str) -> GridField:
    """Parse whitespace-separated rows of numbers into a single-channel grid."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        rows.append([_parse_number(t, lineno) for t in tokens])
    if not rows:
        raise EmptyFieldError("grid text contains no numbers")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"ragged grid: row {i} has {len(row)} values, row 0 has {width}")
    return GridField.from_array(np.array(rows))


def _format_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def emit_grid_text(grid: GridField) -> str:
    if grid.channels != 1:
        raise FormatError("text grids are single-channel")
    return "".join(
        "\t".join(_format_number(v) for v in row) + "\n" for row in grid.array()
    )


def load_pgm(text: str) -> GridField:
    """Read a plain (P2) Netpbm greymap. Values are kept as-is, not normalised."""
    tokens: list[str] = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens:
        raise EmptyFieldError("empty PGM input")
    if tokens[0] != "P2":
        raise FormatError(f"not a plain PGM file (magic {tokens[0]!r})")
    if len(tokens) < 4:
        raise FormatError("truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise ParseError("PGM header fields must be integers") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError("invalid PGM header")
    body = tokens[4:]
    if len(body) != width * height:
        raise FormatError(f"PGM body has {len(body)} samples, expected {width * height}")
    vals = [_parse_number(t, 0) for t in body]
    if any(v < 0 or v > maxval for v in vals):
        raise FormatError("PGM sample outside [0, maxval]")
    return GridField.from_array(np.array(vals).reshape(height, width))


def emit_pgm(grid: GridField) -> str:
    arr = grid.array()
    if grid.channels != 1 or np.any(arr < 0) or not np.all(arr == np.round(arr)):
        raise FormatError("PGM output needs a single channel of non-negative integers")
    maxval = max(1, int(arr.max()))
    lines = ["P2", f"{grid.width} {grid.height}", str(maxval)]
    lines += [" ".join(str(int(v)) for v in row) for row in arr]
    return "\n".join(lines) + "\n"


def load_points_csv(text: str) -> PointSet:
    points: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        coords = [_parse_number(t.strip(), lineno) for t in line.split(",")]
        if points and len(coords) != len(points[0]):
            raise FormatError(
                f"line {lineno}: {len(coords)} coordinates, expected {len(points[0])}"
            )
        if len(coords) not in (2, 3):
            raise FormatError(f"line {lineno}: points must have 2 or 3 coordinates")
        points.append(coords)
    if not points:
        raise EmptyFieldError("no points in CSV input")
    return PointSet(np.array(points))


def emit_points_csv(points: PointSet) -> str:
    return "".join(",".join(repr(float(c)) for c in p) + "\n" for p in points.points)


def field_cells(grid: GridField) -> list[SpatialObject]:
    """One pixel object per cell, row-major."""
    if grid.channels == 1:
        arr = grid.array()
        return [pixel(r, c, arr[r, c]) for r in range(grid.height) for c in range(grid.width)]
    arr = grid.array()
    return [
        SpatialObject("pixel", (r, c), {"value": arr[r, c].tolist()})
        for r in range(grid.height)
        for c in range(grid.width)
    ]


def points_from(coords: Iterable[Sequence[float]]) -> PointSet:
    return PointSet(np.array(list(coords), dtype=float))
