import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spatial_aggregation import field as fld
from spatial_aggregation.errors import ConfigurationError, EmptyFieldError, FieldError, FormatError, ParseError
from spatial_aggregation.ngraph import graph_filter
from spatial_aggregation.operators import aggregate

small_ints = arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=st.integers(0, 255))


def test_bitmap_loads(bitmap):
    assert bitmap.shape == (12, 15)
    assert bitmap.channels == 1
    assert int(bitmap.array().sum()) == 51
    assert bitmap.value(1, 1) == 1 and bitmap.value(0, 0) == 0


def test_grid_values_are_read_only(bitmap):
    with pytest.raises(ValueError):
        bitmap.values[0] = 5


def test_ragged_grid_rejected():
    with pytest.raises(FormatError):
        fld.load_grid_text("1 0 1\n0 1\n")


def test_bad_token_and_empty():
    with pytest.raises(ParseError):
        fld.load_grid_text("1 x\n")
    with pytest.raises(EmptyFieldError):
        fld.load_grid_text("\n\n")
    with pytest.raises(ParseError):
        fld.load_grid_text("1 nan\n")
    assert issubclass(ParseError, FieldError)


@settings(max_examples=50, deadline=None)
@given(small_ints)
def test_grid_text_round_trip(arr):
    g = fld.GridField.from_array(arr)
    assert fld.load_grid_text(fld.emit_grid_text(g)) == g


@settings(max_examples=50, deadline=None)
@given(small_ints)
def test_pgm_round_trip(arr):
    g = fld.GridField.from_array(arr)
    assert fld.load_pgm(fld.emit_pgm(g)) == g


def test_pgm_header_errors():
    with pytest.raises(FormatError):
        fld.load_pgm("P5\n1 1\n255\n0\n")
    with pytest.raises(FormatError):
        fld.load_pgm("P2\n2 2\n255\n0 1 2\n")
    with pytest.raises(FormatError):
        fld.load_pgm("P2\n1 1\n3\n7\n")
    g = fld.load_pgm("P2 # comment\n2 1\n9\n3 4\n")
    assert g.array().tolist() == [[3, 4]]


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 10), st.sampled_from([2, 3])),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_points_csv_round_trip(pts):
    ps = fld.PointSet(pts)
    assert fld.load_points_csv(fld.emit_points_csv(ps)) == ps


def test_points_csv_errors():
    with pytest.raises(FormatError):
        fld.load_points_csv("1,2\n1,2,3\n")
    with pytest.raises(FormatError):
        fld.load_points_csv("1\n")
    with pytest.raises(EmptyFieldError):
        fld.load_points_csv("# only a comment\n")
    assert len(fld.load_points_csv("# x,y\n0,0\n\n1,1\n")) == 2


def test_point_objects_carry_index_and_values():
    ps = fld.PointSet([[0, 0], [1, 2]], values=[[5], [6]])
    objs = ps.objects()
    assert [o.props["index"] for o in objs] == [0, 1]
    assert objs[1].geom == (1.0, 2.0) and objs[1].props["value"] == [6.0]


def test_metrics():
    a, b = (0, 0), (3, 4)
    assert fld.get_metric("euclidean")(a, b) == 5
    assert fld.get_metric("manhattan")(a, b) == 7
    assert fld.get_metric("chebyshev")(a, b) == 4
    with pytest.raises(ConfigurationError):
        fld.get_metric("nope")
    m = fld.register_metric("test-l4", lambda x, y: float(np.sum(np.abs(x - y) ** 4) ** 0.25))
    d = m.pairwise(np.array([[0, 0], [1, 0]]))
    assert d[0, 1] == d[1, 0] == 1.0
    with pytest.raises(ConfigurationError):
        fld.register_metric("test-l4", lambda x, y: 0.0)


def test_field_cells_filter_aggregate(bitmap):
    cells = fld.field_cells(bitmap)
    assert len(cells) == 12 * 15
    g = aggregate(cells, "4-adjacency")
    ones = graph_filter(g, lambda o: o.props["value"] == 1)
    assert len(ones) == 51
    assert all(g.nodes[o.props["source_index"]].geom == o.geom for o in ones.nodes)
    # filtering twice keeps the original source index
    again = graph_filter(ones, lambda o: True)
    assert [o.props["source_index"] for o in again.nodes] == [o.props["source_index"] for o in ones.nodes]


def test_multichannel_cells():
    g = fld.GridField.from_array(np.zeros((2, 3, 2)))
    cells = fld.field_cells(g)
    assert len(cells) == 6 and cells[0].props["value"] == [0.0, 0.0]
    with pytest.raises(ValueError):
        g.value(0, 0)
