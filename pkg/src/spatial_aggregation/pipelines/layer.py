"""One abstraction layer as data: the parameters of aggregate/classify/redescribe.

Pipelines describe each layer with a :class:`Layer` and hand it to
:func:`run_layer`, so every layer goes through the same three operator
calls and differs only in its parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .. import operators as ops
from ..ngraph import NGraph
from ..objects import SpatialObject


@dataclass(frozen=True)
class Layer:
    name: str
    combiner: str
    cluster_proc: Callable[[SpatialObject, SpatialObject], float]
    threshold: float
    class_rules: ops.RuleSet
    keep: tuple[str, ...]
    desc_type: Callable[[NGraph, str], SpatialObject] | Mapping[str, Callable]
    combiner_params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class LayerResult:
    graph: NGraph
    classes: ops.LabeledPartition
    objects: list[SpatialObject]


def run_layer(objects: Sequence[SpatialObject], layer: Layer) -> LayerResult:
    g = ops.aggregate(objects, layer.combiner, **layer.combiner_params)
    lp = ops.classify(g, layer.cluster_proc, layer.threshold, layer.class_rules)
    kept = lp.select(layer.keep)
    return LayerResult(g, lp, ops.redescribe(kept, g, layer.desc_type))


def run_layers(objects: Iterable[SpatialObject], layers: Sequence[Layer]) -> list[LayerResult]:
    results = []
    current = list(objects)
    for layer in layers:
        res = run_layer(current, layer)
        results.append(res)
        current = res.objects
    return results
