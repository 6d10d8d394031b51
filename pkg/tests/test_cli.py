import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from conftest import DATA
from spatial_aggregation import cli
from spatial_aggregation.field import PointSet
from spatial_aggregation.ngraph import construct_mst
from spatial_aggregation.pipelines.tracer import trace_boundaries
from spatial_aggregation.svg import emit_svg

BITMAP = str(DATA / "two_rectangles.txt")
SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def points_csv(tmp_path):
    p = tmp_path / "pts.csv"
    rng = np.random.default_rng(0)
    np.savetxt(p, rng.uniform(0, 1, (12, 2)), delimiter=",")
    return str(p)


def test_trace_summary(capsys):
    assert cli.main(["trace", BITMAP, "--emit", "summary"]) == 0
    assert capsys.readouterr().out == "contours=2 legal=2 segments=5 junctions=2\n"


def test_trace_json_matches_golden(tmp_path):
    out = tmp_path / "trace.json"
    assert cli.main(["trace", BITMAP, "-o", str(out)]) == 0
    assert out.read_text() == (DATA / "two_rectangles_trace.json").read_text()


def test_trace_svg(capsys):
    assert cli.main(["trace", BITMAP, "--emit", "svg"]) == 0
    root = ET.fromstring(capsys.readouterr().out)
    contours = [p for p in root.iter(SVG + "path") if "contour" in p.get("class").split()]
    assert len(contours) == 2 and all("legal" in p.get("class").split() for p in contours)


def test_param_override(capsys):
    assert cli.main(["trace", BITMAP, "--emit", "summary", "--param", "delta=0.5"]) == 0
    assert "legal=2" not in capsys.readouterr().out


def test_graph_commands(points_csv, capsys):
    assert cli.main(["mst", points_csv]) == 0
    g = json.loads(capsys.readouterr().out)
    assert len(g["edges"]) == 11 and g["provenance"].startswith("mst")
    assert cli.main(["knn", points_csv, "--param", "k=2", "--emit", "summary"]) == 0
    assert capsys.readouterr().out.startswith("nodes=12 ")
    assert cli.main(["delaunay", points_csv, "--emit", "svg"]) == 0
    assert "<line" in capsys.readouterr().out


def test_orbit_command(tmp_path, capsys):
    p = tmp_path / "circle.csv"
    t = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    np.savetxt(p, np.c_[np.cos(t), np.sin(t)], delimiter=",")
    assert cli.main(["orbit", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["orbit"]["label"] == "closed-curve"


def test_convolve_command(capsys):
    assert cli.main(["convolve", BITMAP, "--param", "mask=identity"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["width"] == 15 and sum(map(sum, out["values"])) == 51
    assert cli.main(["convolve", BITMAP, "--param", "mask=1,1,1", "--emit", "summary"]) == 0


def test_exit_codes(tmp_path, points_csv, capsys):
    assert cli.main(["trace", points_csv]) == cli.EXIT_INPUT
    assert cli.main(["trace", str(tmp_path / "missing.txt")]) == cli.EXIT_INPUT
    assert cli.main(["trace", BITMAP, "--param", "bogus=1"]) == cli.EXIT_PARAM
    assert cli.main(["trace", BITMAP, "--param", "epsilon=abc"]) == cli.EXIT_PARAM
    assert cli.main(["knn", points_csv, "--param", "k=99"]) == cli.EXIT_PARAM
    assert cli.main(["convolve", BITMAP, "--param", "mask=1,1"]) == cli.EXIT_PARAM
    bad = tmp_path / "bad.txt"
    bad.write_text("0 2\n1 0\n")
    assert cli.main(["trace", str(bad)]) == cli.EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        cli.main(["trace"])
    assert exc.value.code == cli.EXIT_PARAM
    capsys.readouterr()


def test_help_lists_parameters(capsys):
    with pytest.raises(SystemExit):
        cli.main(["orbit", "--help"])
    out = capsys.readouterr().out
    assert "k_sigma=2.0" in out and "closure_ratio" in out


def test_stdin_and_module_entry():
    text = (DATA / "two_rectangles.txt").read_text()
    proc = subprocess.run(
        [sys.executable, "-m", "spatial_aggregation.cli", "trace", "-", "--emit", "summary"],
        input=text, capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("contours=2")


# -- svg -------------------------------------------------------------------

def test_svg_empty():
    root = ET.fromstring(emit_svg())
    assert root.get("viewBox") == "0 0 1 1" and len(list(root)) == 0


def test_svg_single_edge_graph():
    g = construct_mst(PointSet([[0, 0], [2, 1]]))
    root = ET.fromstring(emit_svg(graph=g, pixel_coords=False))
    lines = list(root.iter(SVG + "line"))
    assert len(lines) == 1 and lines[0].get("x2") == "2"


def test_svg_deterministic(bitmap):
    res = trace_boundaries(bitmap)
    a = emit_svg(res.multi_pixel_segments, res.contours)
    assert a == emit_svg(res.multi_pixel_segments, res.contours)
    assert a.count("<path") == 5 + 2
