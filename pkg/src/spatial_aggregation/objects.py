"""Layer-polymorphic spatial objects.

A pixel, a sample point, a boundary segment, a contour and an orbit are all
``SpatialObject`` instances: a ``kind`` tag, a geometry tuple and a free-form
property map. Operators never look inside ``geom`` except through the
accessors defined here and in :mod:`spatial_aggregation.geometry`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any


@dataclass(frozen=True, eq=True)
class SpatialObject:
    kind: str
    geom: tuple
    props: dict[str, Any] = field(default_factory=dict, compare=True)

    __hash__ = None  # props is a dict

    def with_props(self, **updates: Any) -> "SpatialObject":
        return replace(self, props={**self.props, **updates})

    def with_geom(self, geom) -> "SpatialObject":
        return replace(self, geom=tuple(geom))

    @property
    def location(self) -> tuple:
        """Representative coordinates: the point itself for 0-d objects."""
        if self.kind in ("pixel", "point"):
            return self.geom
        if "location" in self.props:
            return tuple(self.props["location"])
        raise AttributeError(f"{self.kind} object has no single location")


def pixel(row: int, col: int, value: float) -> SpatialObject:
    return SpatialObject("pixel", (int(row), int(col)), {"value": float(value)})


def point(coords, **props) -> SpatialObject:
    return SpatialObject("point", tuple(float(c) for c in coords), dict(props))


def to_jsonable(value):
    """Coerce numpy scalars/arrays and tuples into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value
