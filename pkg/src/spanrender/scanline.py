"""Low-level edge/segment helpers shared by geometry and coverage code.

Conventions used throughout:

* An edge is a tuple ``(x0, y0, x1, y1)`` of floats.
* Horizontal-line crossings use the half-open rule: an edge contributes a
  crossing at line ``y`` iff ``min(ey) <= y < max(ey)``.  Horizontal edges
  never contribute crossings.  This makes even-odd parity exact at shared
  vertices.
* A pixel centred at integer ``(px, py)`` with footprint diameter ``d`` owns
  the half-open square ``(px-d/2, px+d/2] x (py-d/2, py+d/2]``: exclusive on
  the left/top, inclusive on the right/bottom.  The helpers below encode the
  integer rounding that follows from that convention.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

Edge = tuple[float, float, float, float]

# Snap tolerance for float results that should be exact integers.
EPS = 1e-9


def polygon_edges(vertices: Sequence[tuple[float, float]]) -> list[Edge]:
    edges = []
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        if x0 == x1 and y0 == y1:
            continue
        edges.append((x0, y0, x1, y1))
    return edges


def crossings(edges: Iterable[Edge], y: float) -> list[float]:
    """Sorted x positions where edges cross the horizontal line at y."""
    xs = []
    for x0, y0, x1, y1 in edges:
        if y0 == y1:
            continue
        if y0 > y1:
            x0, y0, x1, y1 = x1, y1, x0, y0
        if y0 <= y < y1:
            xs.append(x0 + (y - y0) * (x1 - x0) / (y1 - y0))
    xs.sort()
    return xs


def interior_intervals(edges: Iterable[Edge], y: float) -> list[tuple[float, float]]:
    """Even-odd interior intervals of the edge set along the line at y."""
    xs = crossings(edges, y)
    return [(xs[i], xs[i + 1]) for i in range(0, len(xs) - 1, 2)]


def point_in_edges(edges: Iterable[Edge], x: float, y: float) -> bool:
    """Even-odd containment test."""
    inside = False
    for x0, y0, x1, y1 in edges:
        if y0 == y1:
            continue
        if y0 > y1:
            x0, y0, x1, y1 = x1, y1, x0, y0
        if y0 <= y < y1:
            if x < x0 + (y - y0) * (x1 - x0) / (y1 - y0):
                inside = not inside
    return inside


def band_x_extent(edge: Edge, ylo: float, yhi: float) -> tuple[float, float] | None:
    """x-extent of the part of `edge` with y in [ylo, yhi], or None."""
    x0, y0, x1, y1 = edge
    if y0 > y1:
        x0, y0, x1, y1 = x1, y1, x0, y0
    if y1 < ylo or y0 > yhi:
        return None
    if y0 == y1:
        return (min(x0, x1), max(x0, x1))
    t0 = (max(y0, ylo) - y0) / (y1 - y0)
    t1 = (min(y1, yhi) - y0) / (y1 - y0)
    xa = x0 + t0 * (x1 - x0)
    xb = x0 + t1 * (x1 - x0)
    return (min(xa, xb), max(xa, xb))


def chord_through_box(
    p0: tuple[float, float],
    p1: tuple[float, float],
    cx: float,
    cy: float,
    half: float,
) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Clip the infinite line through p0->p1 to a centred square box.

    Returns the two boundary points ordered along the p0->p1 direction, or
    None when the line misses the box.
    """
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    t0, t1 = -math.inf, math.inf
    for d, o, lo, hi in ((dx, p0[0], cx - half, cx + half), (dy, p0[1], cy - half, cy + half)):
        if d == 0.0:
            if not lo <= o <= hi:
                return None
            continue
        ta = (lo - o) / d
        tb = (hi - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    if t0 > t1 or not math.isfinite(t0) or not math.isfinite(t1):
        return None
    a = (p0[0] + t0 * dx, p0[1] + t0 * dy)
    b = (p0[0] + t1 * dx, p0[1] + t1 * dy)
    return a, b


# -- pixel span rounding ---------------------------------------------------


def pixels_touching(a: float, b: float, half: float) -> tuple[int, int]:
    """Integer pixels p whose half-open footprint meets the closed [a, b].

    Condition: p + half >= a and p - half < b.  Returns an inclusive (lo, hi)
    pair; empty when lo > hi.
    """
    lo = math.ceil(a - half - EPS)
    hi = math.ceil(b + half - EPS) - 1
    return lo, hi


def pixels_strictly_touching(a: float, b: float, half: float) -> tuple[int, int]:
    """Pixels p whose *open* footprint interval meets [a, b].

    Condition: p + half > a and p - half < b (strict on both sides).
    """
    lo = math.floor(a - half + EPS) + 1
    hi = math.ceil(b + half - EPS) - 1
    return lo, hi


def point_segment_dist(px: float, py: float, x0: float, y0: float, x1: float, y1: float) -> float:
    dx, dy = x1 - x0, y1 - y0
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - x0, py - y0)
    t = ((px - x0) * dx + (py - y0) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (x0 + t * dx), py - (y0 + t * dy))


def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    def orient(ox, oy, px, py, qx, qy):
        v = (px - ox) * (qy - oy) - (py - oy) * (qx - ox)
        if v > 0:
            return 1
        if v < 0:
            return -1
        return 0

    o1 = orient(ax, ay, bx, by, cx, cy)
    o2 = orient(ax, ay, bx, by, dx, dy)
    o3 = orient(cx, cy, dx, dy, ax, ay)
    o4 = orient(cx, cy, dx, dy, bx, by)
    if o1 != o2 and o3 != o4:
        return True

    def on(ox, oy, px, py, qx, qy):
        return (
            orient(ox, oy, px, py, qx, qy) == 0
            and min(ox, px) <= qx <= max(ox, px)
            and min(oy, py) <= qy <= max(oy, py)
        )

    return (
        on(ax, ay, bx, by, cx, cy)
        or on(ax, ay, bx, by, dx, dy)
        or on(cx, cy, dx, dy, ax, ay)
        or on(cx, cy, dx, dy, bx, by)
    )


def segment_box_dist(
    x0: float, y0: float, x1: float, y1: float,
    bx0: float, by0: float, bx1: float, by1: float,
) -> float:
    """Euclidean distance between a segment and a closed axis-aligned box."""
    inside = (bx0 <= x0 <= bx1 and by0 <= y0 <= by1) or (
        bx0 <= x1 <= bx1 and by0 <= y1 <= by1
    )
    if inside:
        return 0.0
    corners = ((bx0, by0), (bx1, by0), (bx1, by1), (bx0, by1))
    for (cx, cy), (dx2, dy2) in zip(corners, corners[1:] + corners[:1]):
        if _segments_intersect(x0, y0, x1, y1, cx, cy, dx2, dy2):
            return 0.0
    best = math.inf
    for cx, cy in corners:
        best = min(best, point_segment_dist(cx, cy, x0, y0, x1, y1))
    for px, py in ((x0, y0), (x1, y1)):
        qx = min(max(px, bx0), bx1)
        qy = min(max(py, by0), by1)
        best = min(best, math.hypot(px - qx, py - qy))
    return best
