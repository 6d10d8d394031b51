"""Command-line front end.

    spagg trace drawing.txt --emit summary
    spagg orbit samples.csv --param k_sigma=2.5
    spagg mst points.csv -o tree.json

Exit codes: 0 success, 1 input/format error, 2 parameter error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import field as fld
from .errors import ConfigurationError, ContractViolation, FieldError, SpatialAggregationError
from .geometry import Mask, convolve
from .ngraph import construct_delaunay, construct_knn, construct_mst
from .pipelines.orbit import OrbitParams, classify_orbit
from .pipelines.tracer import TracerParams, trace_boundaries
from .svg import emit_svg

EXIT_OK, EXIT_INPUT, EXIT_PARAM, EXIT_INTERNAL = 0, 1, 2, 3

GRID_COMMANDS = ("trace", "convolve")
POINT_COMMANDS = ("orbit", "mst", "delaunay", "knn")
FORMATS = ("grid-text", "pgm", "csv")

MASKS = {
    "identity": [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
    "box3": [[1 / 9] * 3] * 3,
    "gauss3": [[1 / 16, 2 / 16, 1 / 16], [2 / 16, 4 / 16, 2 / 16], [1 / 16, 2 / 16, 1 / 16]],
    "laplace": [[0, 1, 0], [1, -4, 1], [0, 1, 0]],
    "sobel-x": [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]],
    "sobel-y": [[-1, -2, -1], [0, 0, 0], [1, 2, 1]],
}

# per-subcommand parameters: name -> (type, default, help)
GRAPH_PARAMS = {
    "mst": {"metric": (str, "euclidean", "distance metric: euclidean, manhattan, chebyshev")},
    "knn": {
        "k": (int, 3, "neighbors per point"),
        "metric": (str, "euclidean", "distance metric: euclidean, manhattan, chebyshev"),
    },
    "delaunay": {},
    "convolve": {"mask": (str, "box3", f"named mask ({', '.join(MASKS)}) or rows like '1,2,1;2,4,2;1,2,1'")},
}

HELP = {
    "threshold1": "pixel classification threshold",
    "threshold2": "segment classification threshold",
    "separation": "segment neighborhood distance, pixels",
    "delta": "max end-point gap for colinear segments, pixels",
    "epsilon": "max tangent angle for colinear segments, degrees",
    "tangent_window": "pixels used to estimate an end tangent",
    "k_sigma": "std-devs above the local mean for an inconsistent edge",
    "depth": "hops defining an edge's neighborhood",
    "closure_ratio": "end gap / mean edge below which a curve is closed",
    "min_ratio": "inconsistent edges must also exceed this multiple of the local mean",
    "path_fraction": "fraction of degree<=2 nodes for a path-shaped tree",
    "branch_fraction": "fraction of degree>=3 nodes above which the orbit is spatter",
    "min_cluster_size": "smallest cluster counted as an island",
    "min_cluster_fraction": "smallest cluster, as a fraction of the points",
    "min_points": "fewer distinct points than this requests more points",
    "fixed_point_ratio": "diameter / coordinate scale below which the orbit is a fixed point",
    "duplicate_tol": "relative distance below which points are merged",
}


_TYPES = {"float": float, "int": int, "str": str}


def _dataclass_params(cls) -> dict:
    return {
        f.name: (_TYPES.get(f.type, f.type), f.default, HELP.get(f.name, ""))
        for f in dataclasses.fields(cls)
    }


def parameter_table(command: str) -> dict:
    if command == "trace":
        return _dataclass_params(TracerParams)
    if command == "orbit":
        return _dataclass_params(OrbitParams)
    return GRAPH_PARAMS[command]


@dataclass
class RunConfig:
    subcommand: str
    input: str
    format: str | None = None
    output: str | None = None
    emit: str = "json"
    params: dict[str, str] = field(default_factory=dict)


class ParamError(ConfigurationError):
    pass


def _parse_params(command: str, raw: dict[str, str]) -> dict:
    table = parameter_table(command)
    out = {}
    for key, text in raw.items():
        if key not in table:
            known = ", ".join(table) or "none"
            raise ParamError(f"unknown parameter {key!r} for {command} (known: {known})")
        typ = table[key][0]
        try:
            out[key] = typ(text)
        except ValueError:
            raise ParamError(f"parameter {key}={text!r} is not a valid {typ.__name__}") from None
    return out


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FieldError(f"cannot read {path}: {exc.strerror}") from None


def _infer_format(config: RunConfig) -> str:
    if config.format:
        return config.format
    suffix = Path(config.input).suffix.lower()
    if suffix == ".pgm":
        return "pgm"
    if suffix == ".csv":
        return "csv"
    if suffix in (".txt", ".grid"):
        return "grid-text"
    return "grid-text" if config.subcommand in GRID_COMMANDS else "csv"


def _parse_mask(spec: str) -> Mask:
    if spec in MASKS:
        return Mask(np.array(MASKS[spec], dtype=float))
    try:
        rows = [[float(v) for v in row.split(",")] for row in spec.split(";")]
        return Mask(np.array(rows, dtype=float))
    except ValueError:
        raise ParamError(f"mask {spec!r} is neither a named mask nor numeric rows") from None


def _graph_summary(g) -> str:
    return f"nodes={len(g)} edges={len(g.edges)} total_weight={g.total_weight():.12g}"


def execute(config: RunConfig) -> str:
    """Run one subcommand and return the artifact text."""
    command = config.subcommand
    if config.emit not in ("json", "svg", "summary"):
        raise ParamError(f"unknown emit mode {config.emit!r}")
    params = _parse_params(command, config.params)
    fmt = _infer_format(config)
    if fmt not in FORMATS:
        raise ParamError(f"unknown format {fmt!r}")
    if command in GRID_COMMANDS and fmt == "csv":
        raise FieldError(f"{command} needs a grid input, got CSV")
    if command in POINT_COMMANDS and fmt != "csv":
        raise FieldError(f"{command} needs a CSV point input, got {fmt}")
    text = _read_input(config.input)

    if command in GRID_COMMANDS:
        grid = fld.load_pgm(text) if fmt == "pgm" else fld.load_grid_text(text)
        if command == "trace":
            result = trace_boundaries(grid, TracerParams(**params))
            if config.emit == "summary":
                return result.summary() + "\n"
            if config.emit == "svg":
                return emit_svg(result.multi_pixel_segments, result.contours)
            return result.to_json()
        out = convolve(grid, _parse_mask(params.get("mask", "box3")))
        if config.emit == "summary":
            arr = out.array()
            return f"width={out.width} height={out.height} min={arr.min():.12g} max={arr.max():.12g}\n"
        if config.emit == "svg":
            raise ParamError("convolve has no SVG rendering")
        return json.dumps({"width": out.width, "height": out.height, "values": out.array().tolist()}) + "\n"

    points = fld.load_points_csv(text)
    if command == "orbit":
        report = classify_orbit(points, OrbitParams(**params))
        if config.emit == "summary":
            return f"label={report.label} clusters={report.cluster_count}\n"
        if config.emit == "svg":
            raise ParamError("orbit has no SVG rendering; use mst --emit svg for the tree")
        return report.to_json()
    if command == "mst":
        g = construct_mst(points, params.get("metric", "euclidean"))
    elif command == "knn":
        g = construct_knn(points, params.get("k", 3), params.get("metric", "euclidean"))
    else:
        g = construct_delaunay(points)
    if config.emit == "summary":
        return _graph_summary(g) + "\n"
    if config.emit == "svg":
        return emit_svg(graph=g, pixel_coords=False)
    return g.to_json(indent=1) + "\n"


def run(config: RunConfig) -> int:
    try:
        artifact = execute(config)
    except ContractViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except FieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except SpatialAggregationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, AssertionError, KeyError, IndexError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if config.output and config.output != "-":
        Path(config.output).write_text(artifact)
    else:
        sys.stdout.write(artifact)
    return EXIT_OK


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spagg", description="Spatial aggregation: fields to symbolic structure."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    blurbs = {
        "trace": "group bitmap boundary pixels into segments and object contours",
        "orbit": "label a 2-D orbit point set (fixed point, curve, island chain, spatter)",
        "mst": "minimal spanning tree of a point set",
        "delaunay": "Delaunay triangulation edges of a 2-D point set",
        "knn": "k-nearest-neighbor graph of a point set",
        "convolve": "convolve a grid with a mask (edge-clamped)",
    }
    for name, blurb in blurbs.items():
        table = parameter_table(name)
        lines = [f"  {k + '=' + repr(d):<28} {h}" for k, (_, d, h) in table.items()] or ["  (none)"]
        p = sub.add_parser(
            name,
            help=blurb,
            description=blurb,
            epilog="parameters (--param key=value):\n" + "\n".join(lines),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("input", help="input file, or - for stdin")
        p.add_argument("--format", choices=FORMATS, help="input format (default: from extension/subcommand)")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--emit", choices=("json", "svg", "summary"), default="json")
        p.add_argument("--param", action="append", type=_key_value, default=[], metavar="KEY=VALUE")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        subcommand=args.subcommand,
        input=args.input,
        format=args.format,
        output=args.output,
        emit=args.emit,
        params=dict(args.param),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
