import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from oracles import naive_convolve, raster_area
from spatial_aggregation import geometry as geo
from spatial_aggregation.errors import ConfigurationError, IllFormedError
from spatial_aggregation.field import GridField


def rect_cells(r0, c0, h, w):
    return frozenset((r, c) for r in range(r0, r0 + h) for c in range(c0, c0 + w))


SQUARE = geo.Region.polygon([(0, 0), (4, 0), (4, 4), (0, 4)])


def test_polyline_validation():
    with pytest.raises(IllFormedError):
        geo.Polyline([(0, 0)])
    with pytest.raises(IllFormedError):
        geo.Polyline([(0, 0), (0, 0), (1, 1)])
    closed = geo.Polyline([(0, 0), (1, 0), (1, 1), (0, 0)], closed=True)
    assert len(closed.points) == 3 and len(closed.edges()) == 3


def test_polygon_orientation_normalised():
    cw = geo.Region.polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert geo._signed_area(cw.vertices) > 0


def test_segment_intersection_cases():
    hit = geo.segment_intersection((0, 0), (2, 2), (0, 2), (2, 0))
    assert hit.points == ((1.0, 1.0),)
    assert geo.segment_intersection((0, 0), (1, 0), (0, 1), (1, 1)).is_empty
    overlap = geo.segment_intersection((0, 0), (3, 0), (1, 0), (5, 0))
    assert overlap.segments == (((1.0, 0.0), (3.0, 0.0)),)
    touch = geo.segment_intersection((0, 0), (1, 0), (1, 0), (2, 0))
    assert touch.points == ((1.0, 0.0),)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=4, max_size=4))
def test_segment_intersection_symmetric(pts):
    a, b, c, d = pts
    assert geo.segments_intersect(a, b, c, d) == geo.segments_intersect(c, d, a, b)
    assert geo.segments_intersect(a, b, c, d) == geo.segments_intersect(b, a, d, c)


def test_point_in_polygon():
    v = SQUARE.vertices
    assert geo.point_in_polygon((2, 2), v)
    assert not geo.point_in_polygon((5, 2), v)
    assert not geo.point_in_polygon((4, 2), v)  # on the boundary
    concave = [(0, 0), (4, 0), (4, 4), (2, 1), (0, 4)]
    assert not geo.point_in_polygon((2, 3), concave)
    assert geo.point_in_polygon((1, 1), concave)


def test_self_intersecting():
    bowtie = geo.Polyline([(0, 0), (2, 2), (2, 0), (0, 2)], closed=True)
    assert geo.self_intersecting(bowtie)
    assert not geo.self_intersecting(geo.Polyline(SQUARE.vertices, closed=True))
    fold = geo.Polyline([(0, 0), (2, 0), (1, 0)])
    assert geo.self_intersecting(fold)
    assert not geo.self_intersecting(geo.Polyline([(0, 0), (1, 0), (1, 1)]))


def test_curvature():
    assert geo.circumradius_curvature((0, 0), (1, 0), (2, 0)) == 0
    r = 2.5
    a, b, c = [(r * math.cos(t), r * math.sin(t)) for t in (0.1, 1.0, 2.0)]
    assert math.isclose(geo.circumradius_curvature(a, b, c), 1 / r)


def test_intrinsic_geometry():
    line = geo.Polyline([(0, 0), (3, 0), (3, 4)])
    props = geo.intrinsic_geometry(line, ["length", "curvature"])
    assert props["length"] == 7 and len(props["curvature"]) == 1
    sq = geo.intrinsic_geometry(SQUARE, ["area", "perimeter", "centroid"])
    assert sq == {"area": 16.0, "perimeter": 16.0, "centroid": (2.0, 2.0)}
    px = geo.intrinsic_geometry(geo.Region.from_pixels(rect_cells(0, 0, 2, 3)), ["area", "perimeter"])
    assert px == {"area": 6.0, "perimeter": 10.0}
    with pytest.raises(ConfigurationError):
        geo.intrinsic_geometry(line, ["area"])
    with pytest.raises(ConfigurationError):
        geo.intrinsic_geometry((0, 0), ["area"])


def test_contain():
    inner = geo.Region.polygon([(1, 1), (2, 1), (2, 2)])
    assert geo.contain(SQUARE, inner)
    assert not geo.contain(inner, SQUARE)
    touching = geo.Region.polygon([(0, 0), (1, 0), (1, 1)])
    assert not geo.contain(SQUARE, touching)
    assert geo.contain(SQUARE, (1, 1)) and not geo.contain(SQUARE, (0, 1))
    big = geo.Region.from_pixels(rect_cells(0, 0, 5, 5))
    assert geo.contain(big, geo.Region.from_pixels({(2, 2)}))
    assert not geo.contain(big, geo.Region.from_pixels({(0, 2)}))
    assert not geo.contain(geo.EMPTY_REGION, (0, 0))


def test_polygon_intersection_area_vs_raster():
    other = geo.Region.polygon([(2, 2), (6, 2), (6, 6), (2, 6)])
    shapely_area = geo.intersect(SQUARE, other).area
    oracle = raster_area(
        lambda p: geo.point_in_polygon(p, SQUARE.vertices) and geo.point_in_polygon(p, other.vertices),
        ((0, 0), (6, 6)),
        240,
    )
    assert shapely_area == 4.0
    assert abs(oracle - shapely_area) < 0.1


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000))
def test_triangle_intersection_area_vs_raster(seed):
    rng = np.random.default_rng(seed)
    t1 = geo.Region.polygon(rng.uniform(0, 1, (3, 2)))
    t2 = geo.Region.polygon(rng.uniform(0, 1, (3, 2)))
    got = geo.intersect(t1, t2).area
    oracle = raster_area(
        lambda p: geo.point_in_polygon(p, t1.vertices) and geo.point_in_polygon(p, t2.vertices),
        ((0, 0), (1, 1)),
        150,
    )
    assert abs(got - oracle) < 0.02


def test_polyline_intersections():
    a = geo.Polyline([(0, 0), (4, 4)])
    b = geo.Polyline([(0, 4), (4, 0)])
    assert geo.intersect(a, b).points == ((2.0, 2.0),)
    assert geo.intersect(a, b) == geo.intersect(b, a)
    clipped = geo.intersect(geo.Polyline([(-1, 2), (5, 2)]), SQUARE)
    assert clipped.segments == (((0.0, 2.0), (4.0, 2.0)),)
    px = geo.intersect(geo.Region.from_pixels({(0, 0), (0, 1)}), geo.Region.from_pixels({(0, 1)}))
    assert px.regions[0].pixels == {(0, 1)}


def test_contiguous():
    right = geo.Region.polygon([(4, 0), (8, 0), (8, 4), (4, 4)])
    far = geo.Region.polygon([(5, 0), (8, 0), (8, 4), (5, 4)])
    assert geo.contiguous(SQUARE, right)
    assert not geo.contiguous(SQUARE, far)
    assert geo.contiguous(geo.Region.from_pixels({(0, 0)}), geo.Region.from_pixels({(0, 1)}))
    assert not geo.contiguous(geo.Region.from_pixels({(0, 0)}), geo.Region.from_pixels({(1, 1)}))


def test_boundary_of_polygon_and_empty():
    assert geo.boundary(SQUARE) == geo.Polyline(SQUARE.vertices, closed=True)
    assert geo.boundary(geo.EMPTY_REGION).is_empty
    assert geo.coboundary(geo.boundary(SQUARE)) == SQUARE


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.integers(3, 30), st.integers(3, 30))
def test_coboundary_inverts_boundary(r0, c0, h, w):
    region = geo.Region.from_pixels(rect_cells(r0, c0, h, w))
    edge = geo.boundary(region)
    assert geo.is_closed_pixel_curve(edge.pixels)
    assert geo.coboundary(edge) == region


def test_coboundary_matches_hole_filling():
    ring = geo.boundary(geo.Region.from_pixels(rect_cells(2, 3, 6, 9))).pixels
    arr = np.zeros((12, 15), dtype=bool)
    for r, c in ring:
        arr[r, c] = True
    filled = ndimage.binary_fill_holes(arr)
    assert geo.coboundary(geo.Region.from_pixels(ring)).pixels == {tuple(p) for p in np.argwhere(filled)}


def test_coboundary_errors():
    with pytest.raises(IllFormedError):
        geo.coboundary(geo.Polyline([(0, 0), (1, 1)]))
    with pytest.raises(IllFormedError):
        geo.coboundary(geo.Polyline([(0, 0), (2, 2), (2, 0), (0, 2)], closed=True))
    with pytest.raises(IllFormedError):
        geo.coboundary(geo.Region.from_pixels({(0, 0), (0, 1), (0, 2)}))


def test_mask_validation():
    with pytest.raises(ConfigurationError):
        geo.Mask(np.ones((2, 3)))
    assert geo.Mask(np.ones((3, 5))).center == (1, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_convolve_matches_naive_loop(seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(int(rng.integers(1, 12)), int(rng.integers(1, 12))))
    mask = rng.normal(size=(2 * int(rng.integers(0, 3)) + 1, 2 * int(rng.integers(0, 3)) + 1))
    got = geo.convolve(GridField.from_array(values), mask).array()
    assert np.array_equal(got, naive_convolve(values, mask))


def test_convolve_identity_and_constant():
    values = np.arange(12.0).reshape(3, 4)
    ident = np.zeros((3, 3))
    ident[1, 1] = 1
    assert np.array_equal(geo.convolve_array(values, geo.Mask(ident)), values)
    const = np.full((5, 5), 2.0)
    box = geo.Mask(np.full((3, 3), 1 / 9))
    assert np.allclose(geo.convolve_array(const, box), 2.0)
