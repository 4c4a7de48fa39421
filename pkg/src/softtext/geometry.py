"""Polygon primitives: quads, containment, edge distances, shrinking, IoU.

Coordinates are pixel units, x to the right and y downward. Vertex order is
canonical everywhere: positive shoelace area, starting at the vertex with the
smallest (y, x). All functions are pure; nothing here holds mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, DegenerateQuad, OutsideQuad

Point = tuple[float, float]

AREA_EPS = 1e-9
BOUNDARY_TOL = 1e-9


def _as_pts(q) -> np.ndarray:
    """Coerce a Quad or any 4x2 point sequence to a float64 array."""
    if isinstance(q, Quad):
        return q.pts
    pts = np.asarray(q, dtype=np.float64)
    if pts.shape != (4, 2):
        raise DegenerateQuad(f"expected 4 vertices, got shape {pts.shape}")
    return pts


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _canonical_order(pts: np.ndarray) -> np.ndarray:
    if _shoelace(pts) < 0:
        pts = pts[::-1]
    start = min(range(4), key=lambda i: (pts[i, 1], pts[i, 0]))
    return np.roll(pts, -start, axis=0)


def _segments_cross(p1, p2, p3, p4) -> bool:
    """True if open segments (p1,p2) and (p3,p4) properly intersect."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and \
        d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


class Quad:
    """Simple 4-vertex polygon stored in canonical vertex order.

    Construction validates the invariants: finite coordinates, non-degenerate
    area, and no self-intersection. Input vertex order (clockwise or not) is
    accepted and normalized.
    """

    __slots__ = ("pts",)

    def __init__(self, pts: Iterable):
        arr = np.array(list(pts) if not isinstance(pts, np.ndarray) else pts,
                       dtype=np.float64)
        if arr.shape != (4, 2):
            raise DegenerateQuad(f"expected 4 vertices, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DegenerateQuad("non-finite vertex coordinate")
        if abs(_shoelace(arr)) < AREA_EPS:
            raise DegenerateQuad(f"area {abs(_shoelace(arr)):.3g} below {AREA_EPS}")
        if _segments_cross(arr[0], arr[1], arr[2], arr[3]) or \
                _segments_cross(arr[1], arr[2], arr[3], arr[0]):
            raise DegenerateQuad("self-intersecting vertex order")
        self.pts = _canonical_order(arr)
        self.pts.setflags(write=False)

    @classmethod
    def rect(cls, x0: float, y0: float, x1: float, y1: float) -> "Quad":
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    @classmethod
    def rotated_rect(cls, cx: float, cy: float, w: float, h: float,
                     angle_deg: float) -> "Quad":
        """Rectangle of size w x h centered at (cx, cy), rotated by angle_deg."""
        c, s = math.cos(math.radians(angle_deg)), math.sin(math.radians(angle_deg))
        hw, hh = 0.5 * w, 0.5 * h
        corners = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        return cls([(cx + x * c - y * s, cy + x * s + y * c) for x, y in corners])

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y)."""
        mn = self.pts.min(axis=0)
        mx = self.pts.max(axis=0)
        return float(mn[0]), float(mn[1]), float(mx[0]), float(mx[1])

    def translated(self, dx: float, dy: float) -> "Quad":
        return Quad(self.pts + np.array([dx, dy]))

    def is_convex(self) -> bool:
        p = self.pts
        e = np.roll(p, -1, axis=0) - p
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - \
            e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        return bool(np.all(cross >= 0))

    def __eq__(self, other):
        return isinstance(other, Quad) and np.array_equal(self.pts, other.pts)

    def __hash__(self):
        return hash(self.pts.tobytes())

    def __repr__(self):
        vs = ", ".join(f"({x:g},{y:g})" for x, y in self.pts)
        return f"Quad[{vs}]"


@dataclass(frozen=True)
class EdgeDistances:
    """Perpendicular distances from an interior point to the four edge lines.

    Opposite edges are paired; the pair with the larger mean length runs along
    the box's long axis, so the distances across it (to the two short edges)
    sum to the long dimension. That sum is span_w; the other is span_h. For a
    rectangle span_w is the longer side and span_h the shorter.
    """

    d_left: float
    d_right: float
    d_top: float
    d_bottom: float

    @property
    def span_w(self) -> float:
        return self.d_left + self.d_right

    @property
    def span_h(self) -> float:
        return self.d_top + self.d_bottom


def polygon_area(q) -> float:
    """Shoelace area; positive in canonical order.

    Raises DegenerateQuad below the area floor so zero-area input is rejected
    at the same threshold everywhere.
    """
    pts = _as_pts(q)
    area = abs(_shoelace(pts))
    if area < AREA_EPS:
        raise DegenerateQuad(f"area {area:.3g} below {AREA_EPS}")
    return area


def _point_seg_dist(px, py, ax, ay, bx, by) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    seg_len2 = vx * vx + vy * vy
    if seg_len2 == 0.0:
        return math.hypot(wx, wy)
    t = max(0.0, min(1.0, (wx * vx + wy * vy) / seg_len2))
    return math.hypot(wx - t * vx, wy - t * vy)


def point_in_quad(p: Point, q, tol: float = BOUNDARY_TOL) -> bool:
    """Boundary-inclusive containment test (even-odd rule for the interior)."""
    pts = _as_pts(q)
    px, py = float(p[0]), float(p[1])
    for i in range(4):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % 4]
        if _point_seg_dist(px, py, ax, ay, bx, by) <= tol:
            return True
    inside = False
    for i in range(4):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % 4]
        if (ay > py) != (by > py):
            xc = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < xc:
                inside = not inside
    return inside


def _edge_line_distances(px: float, py: float, pts: np.ndarray) -> list[float]:
    out = []
    for i in range(4):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % 4]
        ex, ey = bx - ax, by - ay
        length = math.hypot(ex, ey)
        out.append(abs(ex * (py - ay) - ey * (px - ax)) / length)
    return out


def edge_distances(p: Point, q) -> EdgeDistances:
    """Distances from an interior point to the supporting line of each edge.

    Raises OutsideQuad when the point is not inside (boundary counts as in).
    """
    quad = q if isinstance(q, Quad) else Quad(q)
    if not point_in_quad(p, quad):
        raise OutsideQuad(f"point {p} outside {quad}")
    pts = quad.pts
    d = _edge_line_distances(float(p[0]), float(p[1]), pts)
    lens = [math.hypot(*(pts[(i + 1) % 4] - pts[i])) for i in range(4)]
    if lens[0] + lens[2] >= lens[1] + lens[3]:
        # edges 0 and 2 run along the long axis; crossing 3 -> 1 spans it
        return EdgeDistances(d_left=d[3], d_right=d[1], d_top=d[0], d_bottom=d[2])
    return EdgeDistances(d_left=d[0], d_right=d[2], d_top=d[1], d_bottom=d[3])


def shrink_quad(q, r: float) -> Quad:
    """Contract a quad by moving each vertex inward along both incident edges.

    The offset at each vertex is r times the length of its shorter incident
    edge. r = 0 returns the quad unchanged; r must stay below 0.5 so opposite
    vertices cannot cross.
    """
    if not 0.0 <= r < 0.5:
        raise ValueError(f"shrink fraction {r} outside [0, 0.5)")
    quad = q if isinstance(q, Quad) else Quad(q)
    if r == 0.0:
        return quad
    pts = quad.pts
    out = np.empty_like(pts)
    for i in range(4):
        v = pts[i]
        prev_v = pts[(i - 1) % 4]
        next_v = pts[(i + 1) % 4]
        len_prev = math.hypot(*(prev_v - v))
        len_next = math.hypot(*(next_v - v))
        off = r * min(len_prev, len_next)
        u_prev = (prev_v - v) / len_prev
        u_next = (next_v - v) / len_next
        out[i] = v + off * u_prev + off * u_next
    try:
        return Quad(out)
    except DegenerateQuad as exc:
        raise DegenerateQuad(f"shrink by {r} collapsed the quad: {exc}") from exc


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> list[tuple[float, float]]:
    """Sutherland-Hodgman: clip `subject` against convex `clip` (CCW order)."""
    output = [(float(x), float(y)) for x, y in subject]
    n = len(clip)
    for i in range(n):
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        input_pts, output = output, []
        if not input_pts:
            break
        ex, ey = bx - ax, by - ay

        def side(px, py):
            return ex * (py - ay) - ey * (px - ax)

        prev = input_pts[-1]
        prev_side = side(*prev)
        for cur in input_pts:
            cur_side = side(*cur)
            if cur_side >= 0:
                if prev_side < 0:
                    t = prev_side / (prev_side - cur_side)
                    output.append((prev[0] + t * (cur[0] - prev[0]),
                                   prev[1] + t * (cur[1] - prev[1])))
                output.append(cur)
            elif prev_side >= 0:
                t = prev_side / (prev_side - cur_side)
                output.append((prev[0] + t * (cur[0] - prev[0]),
                               prev[1] + t * (cur[1] - prev[1])))
            prev, prev_side = cur, cur_side
    return output


def _poly_area(pts: Sequence[tuple[float, float]]) -> float:
    if len(pts) < 3:
        return 0.0
    a = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        a += x0 * y1 - x1 * y0
    return abs(a) * 0.5


def polygon_intersection_area(a, b) -> float:
    """Area of the overlap of two quads via Sutherland-Hodgman clipping.

    The clipper must be convex; when only one of the pair is, that one clips
    (the operation is symmetric). Degenerate overlap returns 0.
    """
    qa = a if isinstance(a, Quad) else Quad(a)
    qb = b if isinstance(b, Quad) else Quad(b)
    if not qb.is_convex() and qa.is_convex():
        qa, qb = qb, qa
    return _poly_area(_clip_polygon(qa.pts, qb.pts))


def polygon_iou(a, b) -> float:
    """Intersection-over-union of two quads, in [0, 1]."""
    qa = a if isinstance(a, Quad) else Quad(a)
    qb = b if isinstance(b, Quad) else Quad(b)
    inter = polygon_intersection_area(qa, qb)
    if inter <= 0.0:
        return 0.0
    union = polygon_area(qa) + polygon_area(qb) - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull in CCW order without repeats."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    p = pts[order]
    # drop duplicate points
    keep = np.ones(len(p), dtype=bool)
    keep[1:] = np.any(np.diff(p, axis=0) != 0, axis=1)
    p = p[keep]
    if len(p) < 3:
        return p

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for pt in p:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list = []
    for pt in p[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return np.array(lower[:-1] + upper[:-1])


def min_area_rect(points) -> Quad:
    """Minimum-area enclosing rotated rectangle of a point set.

    Classic rotating-calipers result: an optimal rectangle is flush with some
    convex-hull edge, so it suffices to test each hull edge direction.
    """
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                     dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DegenerateInput(f"need at least 3 points, got {pts.shape}")
    hull = _convex_hull(pts)
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")

    best = None
    n = len(hull)
    for i in range(n):
        ex, ey = hull[(i + 1) % n] - hull[i]
        length = math.hypot(ex, ey)
        if length == 0.0:
            continue
        c, s = ex / length, ey / length
        xs = hull[:, 0] * c + hull[:, 1] * s
        ys = -hull[:, 0] * s + hull[:, 1] * c
        x0, x1 = xs.min(), xs.max()
        y0, y1 = ys.min(), ys.max()
        area = (x1 - x0) * (y1 - y0)
        if best is None or area < best[0]:
            best = (area, c, s, x0, x1, y0, y1)

    area, c, s, x0, x1, y0, y1 = best
    if area < AREA_EPS:
        raise DegenerateInput("points are collinear")
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    return Quad([(x * c - y * s, x * s + y * c) for x, y in corners])


def _seg_seg_dist(a0, a1, b0, b1) -> float:
    if _segments_cross(a0, a1, b0, b1):
        return 0.0
    return min(
        _point_seg_dist(a0[0], a0[1], b0[0], b0[1], b1[0], b1[1]),
        _point_seg_dist(a1[0], a1[1], b0[0], b0[1], b1[0], b1[1]),
        _point_seg_dist(b0[0], b0[1], a0[0], a0[1], a1[0], a1[1]),
        _point_seg_dist(b1[0], b1[1], a0[0], a0[1], a1[0], a1[1]),
    )


def quad_gap(a, b) -> float:
    """Minimum distance between two quads; 0 when they touch or overlap."""
    qa = a if isinstance(a, Quad) else Quad(a)
    qb = b if isinstance(b, Quad) else Quad(b)
    if point_in_quad(tuple(qa.pts[0]), qb) or point_in_quad(tuple(qb.pts[0]), qa):
        return 0.0
    best = math.inf
    for i in range(4):
        for j in range(4):
            d = _seg_seg_dist(qa.pts[i], qa.pts[(i + 1) % 4],
                              qb.pts[j], qb.pts[(j + 1) % 4])
            if d < best:
                best = d
    return best
