"""Geometry primitives: areas, containment, distances, shrinking, IoU, MAR."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softtext.errors import DegenerateInput, DegenerateQuad, OutsideQuad
from softtext.geometry import (Quad, edge_distances, min_area_rect, point_in_quad,
                               polygon_area, polygon_iou, quad_gap, shrink_quad)


def random_convex_quad(rng, scale=100.0, min_area=40.0):
    """Random convex quad: centroid-angle-ordered points, rejected if thin."""
    while True:
        pts = rng.uniform(5.0, scale - 5.0, size=(4, 2))
        center = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0]))
        pts = pts[order]
        try:
            q = Quad(pts)
        except DegenerateQuad:
            continue
        if q.is_convex() and polygon_area(q) >= min_area:
            return q


def grid_iou(a: Quad, b: Quad, cells=512) -> float:
    """Rasterized IoU oracle: count pixel centers of a grid over the joint bbox."""
    (ax0, ay0, ax1, ay1), (bx0, by0, bx1, by1) = a.bounds, b.bounds
    x0, y0 = min(ax0, bx0), min(ay0, by0)
    x1, y1 = max(ax1, bx1), max(ay1, by1)
    xs = np.linspace(x0, x1, cells, endpoint=False) + (x1 - x0) / (2 * cells)
    ys = np.linspace(y0, y1, cells, endpoint=False) + (y1 - y0) / (2 * cells)
    gx, gy = np.meshgrid(xs, ys)

    def inside(q):
        ok = np.ones(gx.shape, dtype=bool)
        for i in range(4):
            px, py = q.pts[i]
            qx, qy = q.pts[(i + 1) % 4]
            ok &= (qx - px) * (gy - py) - (qy - py) * (gx - px) >= 0
        return ok

    in_a = inside(a)
    in_b = inside(b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


class TestPolygonArea:
    def test_unit_square(self):
        assert polygon_area(Quad.rect(0, 0, 1, 1)) == 1.0

    def test_rectangle(self):
        assert polygon_area(Quad.rect(0, 0, 10, 4)) == 40.0

    def test_collinear_points_rejected(self):
        with pytest.raises(DegenerateQuad):
            polygon_area([(0, 0), (1, 0), (2, 0), (3, 0)])

    def test_self_intersecting_rejected(self):
        with pytest.raises(DegenerateQuad):
            Quad([(0, 0), (1, 1), (1, 0), (0, 1)])


class TestPointInQuad:
    def test_interior(self):
        assert point_in_quad((0.5, 0.5), Quad.rect(0, 0, 1, 1))

    def test_exterior(self):
        assert not point_in_quad((2, 2), Quad.rect(0, 0, 1, 1))

    def test_boundary_is_inside(self):
        assert point_in_quad((0, 0.5), Quad.rect(0, 0, 1, 1))

    @given(st.floats(-2, 3).filter(lambda v: abs(v) > 1e-8 and abs(v - 2) > 1e-8),
           st.floats(-2, 3).filter(lambda v: abs(v) > 1e-8 and abs(v - 1) > 1e-8))
    def test_matches_rect_arithmetic(self, x, y):
        # coordinates are kept clear of the 1e-9 boundary-inclusion band
        q = Quad.rect(0, 0, 2, 1)
        expected = 0 < x < 2 and 0 < y < 1
        assert point_in_quad((x, y), q) == expected

    def test_nonconvex_quad(self):
        # arrowhead: (1, 0.5) sits in the notch, outside the polygon
        q = Quad([(0, 0), (2, 0), (1.9, 1.0), (1.0, 0.2)])
        assert point_in_quad((1.0, 0.1), q)
        assert not point_in_quad((1.0, 0.8), q)


class TestEdgeDistances:
    def test_axis_aligned(self):
        d = edge_distances((3, 1), Quad.rect(0, 0, 10, 4))
        assert (d.d_left, d.d_right, d.d_top, d.d_bottom) == (3, 7, 1, 3)

    def test_center_symmetry(self):
        d = edge_distances((5, 2), Quad.rect(0, 0, 10, 4))
        assert (d.d_left, d.d_right, d.d_top, d.d_bottom) == (5, 5, 2, 2)

    def test_spans_match_rect_dims(self):
        rng = np.random.default_rng(11)
        q = Quad.rect(0, 0, 10, 4)
        for _ in range(200):
            p = (rng.uniform(0, 10), rng.uniform(0, 4))
            d = edge_distances(p, q)
            assert abs(d.span_w - 10.0) < 1e-9
            assert abs(d.span_h - 4.0) < 1e-9

    def test_rotation_swaps_pairs_keeps_multiset(self):
        d0 = edge_distances((3, 1), Quad.rect(0, 0, 10, 4))
        # rotate the rect and the point by 90 degrees about the origin:
        # (x, y) -> (-y, x), then shift into positive coordinates
        q90 = Quad([(4, 0), (4, 10), (0, 10), (0, 0)])
        d90 = edge_distances((4 - 1, 3), q90)
        assert (d90.d_left, d90.d_right) == pytest.approx((d0.d_left, d0.d_right))
        assert (d90.d_top, d90.d_bottom) == pytest.approx((d0.d_top, d0.d_bottom))
        m0 = sorted((d0.d_left, d0.d_right, d0.d_top, d0.d_bottom))
        m90 = sorted((d90.d_left, d90.d_right, d90.d_top, d90.d_bottom))
        assert m0 == pytest.approx(m90)

    def test_outside_point_rejected(self):
        with pytest.raises(OutsideQuad):
            edge_distances((20, 20), Quad.rect(0, 0, 10, 4))


class TestShrinkQuad:
    def test_square(self):
        q = shrink_quad(Quad.rect(0, 0, 10, 10), 0.2)
        np.testing.assert_allclose(q.pts, [(2, 2), (8, 2), (8, 8), (2, 8)])

    def test_rect_uses_shorter_incident_edge(self):
        q = shrink_quad(Quad.rect(0, 0, 10, 4), 0.2)
        np.testing.assert_allclose(
            q.pts, [(0.8, 0.8), (9.2, 0.8), (9.2, 3.2), (0.8, 3.2)])

    def test_zero_is_identity(self):
        q = Quad.rotated_rect(50, 40, 30, 12, 17.0)
        assert shrink_quad(q, 0.0) == q

    def test_result_contained_and_smaller(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            q = Quad.rotated_rect(rng.uniform(40, 60), rng.uniform(40, 60),
                                  rng.uniform(10, 40), rng.uniform(6, 20),
                                  rng.uniform(-90, 90))
            for r in (0.1, 0.2, 0.3, 0.49):
                s = shrink_quad(q, r)
                assert all(point_in_quad(tuple(v), q) for v in s.pts)
                assert polygon_area(s) < polygon_area(q)

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValueError):
            shrink_quad(Quad.rect(0, 0, 1, 1), 0.5)


class TestPolygonIou:
    def test_identical(self):
        q = Quad.rotated_rect(10, 10, 8, 3, 31.0)
        assert polygon_iou(q, q) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint(self):
        assert polygon_iou(Quad.rect(0, 0, 1, 1), Quad.rect(5, 5, 6, 6)) == 0.0

    def test_half_offset_squares(self):
        # intersection 0.5, union 1.5
        iou = polygon_iou(Quad.rect(0, 0, 1, 1), Quad.rect(0.5, 0, 1.5, 1))
        assert iou == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            a = random_convex_quad(rng)
            b = random_convex_quad(rng)
            assert polygon_iou(a, b) == pytest.approx(polygon_iou(b, a), abs=1e-12)
            assert 0.0 <= polygon_iou(a, b) <= 1.0

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(23)
        worst = 0.0
        for _ in range(1000):
            a = random_convex_quad(rng)
            b = random_convex_quad(rng)
            err = abs(polygon_iou(a, b) - grid_iou(a, b))
            worst = max(worst, err)
        assert worst < 0.01, f"worst grid-oracle deviation {worst}"


class TestMinAreaRect:
    def test_axis_aligned_corners(self):
        q = min_area_rect([(0, 0), (10, 0), (10, 4), (0, 4)])
        np.testing.assert_allclose(q.pts, Quad.rect(0, 0, 10, 4).pts, atol=1e-6)

    def test_rotated_rect_recovered(self):
        src = Quad.rotated_rect(50, 50, 20, 8, 30.0)
        q = min_area_rect(src.pts)
        np.testing.assert_allclose(q.pts, src.pts, atol=1e-6)

    def test_two_points_rejected(self):
        with pytest.raises(DegenerateInput):
            min_area_rect([(0, 0), (1, 1)])

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateInput):
            min_area_rect([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_area_between_hull_and_bbox(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            pts = rng.uniform(0, 50, size=(rng.integers(3, 12), 2))
            try:
                q = min_area_rect(pts)
            except DegenerateInput:
                continue
            x0, y0 = pts.min(axis=0)
            x1, y1 = pts.max(axis=0)
            bbox_area = (x1 - x0) * (y1 - y0)
            assert polygon_area(q) <= bbox_area + 1e-9
            assert all(point_in_quad(tuple(p), q, tol=1e-7) for p in pts)

    def test_matches_dense_angle_sweep(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            pts = rng.uniform(0, 50, size=(8, 2))
            q = min_area_rect(pts)
            best = math.inf
            for ang in np.linspace(0, math.pi / 2, 2000, endpoint=False):
                c, s = math.cos(ang), math.sin(ang)
                xs = pts[:, 0] * c + pts[:, 1] * s
                ys = -pts[:, 0] * s + pts[:, 1] * c
                best = min(best, (xs.max() - xs.min()) * (ys.max() - ys.min()))
            assert polygon_area(q) <= best + 1e-6


class TestQuadGap:
    def test_overlapping_is_zero(self):
        assert quad_gap(Quad.rect(0, 0, 4, 4), Quad.rect(2, 2, 6, 6)) == 0.0

    def test_axis_aligned_gap(self):
        assert quad_gap(Quad.rect(0, 0, 4, 4), Quad.rect(7, 0, 11, 4)) == pytest.approx(3.0)

    def test_diagonal_gap(self):
        g = quad_gap(Quad.rect(0, 0, 2, 2), Quad.rect(5, 6, 8, 9))
        assert g == pytest.approx(math.hypot(3, 4))


class TestCanonicalOrder:
    def test_clockwise_input_normalized(self):
        q1 = Quad([(0, 0), (0, 4), (10, 4), (10, 0)])
        q2 = Quad([(0, 0), (10, 0), (10, 4), (0, 4)])
        assert q1 == q2

    def test_first_vertex_smallest_y_then_x(self):
        q = Quad([(10, 4), (0, 4), (0, 0), (10, 0)])
        assert tuple(q.pts[0]) == (0.0, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 3), st.booleans())
    def test_rotation_and_reversal_invariant(self, roll, flip):
        pts = [(3.0, 1.0), (9.0, 2.0), (8.0, 7.0), (2.0, 6.0)]
        pts = pts[roll:] + pts[:roll]
        if flip:
            pts = pts[::-1]
        assert Quad(pts) == Quad([(3.0, 1.0), (9.0, 2.0), (8.0, 7.0), (2.0, 6.0)])
