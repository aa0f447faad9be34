"""Primitive geometries: pixel-set computation and partial rasterization.

Pixel conventions (shared with the test oracles):

* Pixel (px, py) is centred at the integer point; its antialiasing footprint
  is the square of side `footprint_diameter` around the centre, treated as
  half-open: exclusive on the left/top edges, inclusive on the right/bottom.
* ``shape``    = pixels whose footprint meets the geometry at all.
* ``minshape`` = pixels whose footprint lies entirely inside the geometry;
  equivalently the centre is inside and no boundary edge meets the *open*
  footprint square.
* ``maxshape`` = shape minus minshape: the pixels that need real coverage.

Shapes of polygons are computed per finite-width scanline band: interior
intervals at the band's top and bottom lines plus the pixels touched by any
edge passing through the band.  Ties at exact pixel boundaries are broken by
an epsilon nudge consistent with the half-open convention.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from . import scanline as sl
from .antialias import (
    EdgeTable,
    GaussianFootprint,
    SubspanTable,
    default_tables,
    perimeter_param,
    row_multi_coverage,
)
from .pixelset import Shape
from .sprite import Color, Sprite, SpriteSpan, _freeze

Point = tuple[float, float]

_LINE_EPS = 1e-7  # nudge used when sampling lines that sit exactly on edges


@dataclass(frozen=True)
class Polygon:
    """Implicitly closed polygon, even-odd fill rule."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices)
        )
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least 3 vertices")


@dataclass(frozen=True)
class BrushStroke:
    """All points within `radius` of the polyline `path`."""

    path: tuple[Point, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(
            self, "path", tuple((float(x), float(y)) for x, y in self.path)
        )
        if not self.path:
            raise ValueError("brush path needs at least one point")
        if self.radius <= 0:
            raise ValueError("brush radius must be positive")


@dataclass(frozen=True)
class Combine:
    op: str  # union | intersection | difference
    left: "Geometry"
    right: "Geometry"

    def __post_init__(self):
        if self.op not in ("union", "intersection", "difference"):
            raise ValueError(f"unknown combine op {self.op!r}")


Geometry = Union[Polygon, BrushStroke, Combine]


@dataclass(frozen=True)
class Solid:
    color: Color


@dataclass(frozen=True)
class LinearGradient:
    p0: Point
    p1: Point
    c0: Color
    c1: Color


Fill = Union[Solid, LinearGradient]


@dataclass(frozen=True)
class BandEdgeList:
    """Edges relevant to one finite-width scanline band of a polygon."""

    top_crossings: tuple[float, ...]
    bottom_crossings: tuple[float, ...]
    band_edges: tuple[sl.Edge, ...]


# -- point membership -------------------------------------------------------


def point_in_geometry(g: Geometry, x: float, y: float) -> bool:
    if isinstance(g, Polygon):
        return sl.point_in_edges(sl.polygon_edges(g.vertices), x, y)
    if isinstance(g, BrushStroke):
        return _path_dist(g.path, x, y) <= g.radius
    if g.op == "union":
        return point_in_geometry(g.left, x, y) or point_in_geometry(g.right, x, y)
    if g.op == "intersection":
        return point_in_geometry(g.left, x, y) and point_in_geometry(g.right, x, y)
    return point_in_geometry(g.left, x, y) and not point_in_geometry(g.right, x, y)


def _path_segments(path: Sequence[Point]) -> list[tuple[float, float, float, float]]:
    if len(path) == 1:
        x, y = path[0]
        return [(x, y, x, y)]
    return [
        (path[i][0], path[i][1], path[i + 1][0], path[i + 1][1])
        for i in range(len(path) - 1)
    ]


def _path_dist(path: Sequence[Point], x: float, y: float) -> float:
    return min(
        sl.point_segment_dist(x, y, *seg) for seg in _path_segments(path)
    )


def geometry_bounds(g: Geometry) -> tuple[float, float, float, float]:
    if isinstance(g, Polygon):
        xs = [p[0] for p in g.vertices]
        ys = [p[1] for p in g.vertices]
        return (min(xs), min(ys), max(xs), max(ys))
    if isinstance(g, BrushStroke):
        xs = [p[0] for p in g.path]
        ys = [p[1] for p in g.path]
        r = g.radius
        return (min(xs) - r, min(ys) - r, max(xs) + r, max(ys) + r)
    lb = geometry_bounds(g.left)
    if g.op == "difference":
        return lb
    rb = geometry_bounds(g.right)
    if g.op == "intersection":
        return (
            max(lb[0], rb[0]), max(lb[1], rb[1]),
            min(lb[2], rb[2]), min(lb[3], rb[3]),
        )
    return (
        min(lb[0], rb[0]), min(lb[1], rb[1]),
        max(lb[2], rb[2]), max(lb[3], rb[3]),
    )


# -- affine support ----------------------------------------------------------

Affine = tuple[float, float, float, float, float, float]  # x' = ax+by+c ...


def affine_apply(m: Affine, p: Point) -> Point:
    a, b, c, d, e, f = m
    return (a * p[0] + b * p[1] + c, d * p[0] + e * p[1] + f)


def affine_det(m: Affine) -> float:
    return m[0] * m[4] - m[1] * m[3]


def affine_invert(m: Affine) -> Affine:
    a, b, c, d, e, f = m
    det = a * e - b * d
    if abs(det) < 1e-12:
        raise ValueError("singular affine transform")
    ia, ib = e / det, -b / det
    id_, ie = -d / det, a / det
    return (ia, ib, -(ia * c + ib * f), id_, ie, -(id_ * c + ie * f))


def transform_geometry(g: Geometry, m: Affine) -> Geometry:
    if isinstance(g, Polygon):
        return Polygon(tuple(affine_apply(m, p) for p in g.vertices))
    if isinstance(g, BrushStroke):
        # shear distorts discs; the radius scales by the area factor, exact
        # for similarity transforms
        return BrushStroke(
            tuple(affine_apply(m, p) for p in g.path),
            g.radius * math.sqrt(abs(affine_det(m))),
        )
    return Combine(g.op, transform_geometry(g.left, m), transform_geometry(g.right, m))


def rotation_about(angle_deg: float, cx: float, cy: float) -> Affine:
    th = math.radians(angle_deg)
    c, s = math.cos(th), math.sin(th)
    return (c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy)


def translation(dx: float, dy: float) -> Affine:
    return (1.0, 0.0, dx, 0.0, 1.0, dy)


# -- fills -------------------------------------------------------------------


def fill_color_at(fill: Fill, x: float, y: float) -> Color:
    if isinstance(fill, Solid):
        return fill.color
    dx = fill.p1[0] - fill.p0[0]
    dy = fill.p1[1] - fill.p0[1]
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return fill.c0
    t = ((x - fill.p0[0]) * dx + (y - fill.p0[1]) * dy) / l2
    t = min(1.0, max(0.0, t))
    s0 = fill.c0.to_straight()
    s1 = fill.c1.to_straight()
    srgba = tuple(a + t * (b - a) for a, b in zip(s0, s1))
    return Color.from_straight(*srgba)


def fill_row_values(fill: Fill, y: float, x0: int, x1: int) -> np.ndarray:
    """Premultiplied fill colors for integer columns x0..x1 at row y."""
    n = x1 - x0 + 1
    if isinstance(fill, Solid):
        return np.broadcast_to(np.asarray(fill.color, dtype=np.float64), (n, 4))
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    dx = fill.p1[0] - fill.p0[0]
    dy = fill.p1[1] - fill.p0[1]
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        t = np.zeros(n)
    else:
        t = ((xs - fill.p0[0]) * dx + (y - fill.p0[1]) * dy) / l2
        np.clip(t, 0.0, 1.0, out=t)
    s0 = np.asarray(fill.c0.to_straight())
    s1 = np.asarray(fill.c1.to_straight())
    straight = s0 + t[:, None] * (s1 - s0)
    out = straight.copy()
    out[:, :3] *= out[:, 3:4]
    return out


def fill_is_solid(fill: Fill) -> bool:
    return isinstance(fill, Solid)


def transform_fill(fill: Fill, m: Affine) -> Fill:
    if isinstance(fill, Solid):
        return fill
    return LinearGradient(
        affine_apply(m, fill.p0), affine_apply(m, fill.p1), fill.c0, fill.c1
    )


# -- polygon scanline machinery ----------------------------------------------


def _polygon_area(vertices: Sequence[Point]) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _row_range(y0: float, y1: float, half: float) -> range:
    lo = math.floor(y0 - half - sl.EPS)
    hi = math.ceil(y1 + half + sl.EPS)
    return range(lo, hi + 1)


def band_edge_list(edges: Sequence[sl.Edge], y: int, half: float) -> BandEdgeList:
    """Crossings at a band's sampling lines plus the edges inside the band.

    The band for pixel row y is (y-half, y+half]; the top line is sampled a
    hair inside so geometry touching only the excluded top boundary does not
    count.
    """
    ytop = y - half + _LINE_EPS
    ybot = y + half
    band: list[sl.Edge] = []
    for e in edges:
        ey0 = min(e[1], e[3])
        ey1 = max(e[1], e[3])
        if ey1 > y - half + sl.EPS and ey0 <= ybot + sl.EPS:
            band.append(e)
    return BandEdgeList(
        tuple(sl.crossings(band, ytop)),
        tuple(sl.crossings(band, ybot)),
        tuple(band),
    )


def _polygon_shape_row(bel: BandEdgeList, y: int, half: float) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    for xs in (bel.top_crossings, bel.bottom_crossings):
        for k in range(0, len(xs) - 1, 2):
            lo, hi = sl.pixels_touching(xs[k], xs[k + 1], half)
            if lo <= hi:
                spans.append((lo, hi))
    for e in bel.band_edges:
        ext = sl.band_x_extent(e, y - half, y + half)
        if ext is None:
            continue
        lo, hi = sl.pixels_touching(ext[0], ext[1], half)
        if lo <= hi:
            spans.append((lo, hi))
    return spans


def _polygon_shape(g: Polygon, half: float) -> Shape:
    if _polygon_area(g.vertices) == 0.0:
        return Shape.empty()
    edges = sl.polygon_edges(g.vertices)
    _, y0, _, y1 = geometry_bounds(g)
    triples = []
    for y in _row_range(y0, y1, half):
        bel = band_edge_list(edges, y, half)
        for lo, hi in _polygon_shape_row(bel, y, half):
            triples.append((y, lo, hi))
    return Shape(triples)


def _polygon_minshape(g: Polygon, half: float) -> Shape:
    if _polygon_area(g.vertices) == 0.0:
        return Shape.empty()
    edges = sl.polygon_edges(g.vertices)
    _, gy0, _, gy1 = geometry_bounds(g)
    inside_triples = []
    blocked_triples = []
    for y in _row_range(gy0, gy1, half):
        xs = sl.crossings(edges, float(y))
        for k in range(0, len(xs) - 1, 2):
            lo = math.ceil(xs[k] - sl.EPS)
            hi = math.ceil(xs[k + 1] - sl.EPS) - 1
            if lo <= hi:
                inside_triples.append((y, lo, hi))
        # pixels whose open footprint meets any edge cannot be fully covered
        for e in edges:
            ey0 = min(e[1], e[3])
            ey1 = max(e[1], e[3])
            # the blocking test uses the open band: edges that only graze the
            # band boundary lines leave full coverage intact
            if not (ey1 > y - half + sl.EPS and ey0 < y + half - sl.EPS):
                continue
            ext = sl.band_x_extent(e, y - half, y + half)
            if ext is None:
                continue
            lo, hi = sl.pixels_strictly_touching(ext[0], ext[1], half)
            if lo <= hi:
                blocked_triples.append((y, lo, hi))
    return Shape(inside_triples) - Shape(blocked_triples)


# -- brush stroke pixel sets ---------------------------------------------------


def _brush_rows(g: BrushStroke, half: float):
    x0, y0, x1, y1 = geometry_bounds(g)
    return range(math.floor(y0 - half) - 1, math.ceil(y1 + half) + 2)


def _brush_shape(g: BrushStroke, half: float) -> Shape:
    segs = _path_segments(g.path)
    triples = []
    for y in _brush_rows(g, half):
        cols: set[int] = set()
        for seg in segs:
            sx0 = min(seg[0], seg[2]) - g.radius - half
            sx1 = max(seg[0], seg[2]) + g.radius + half
            for px in range(math.floor(sx0) - 1, math.ceil(sx1) + 2):
                if px in cols:
                    continue
                d = sl.segment_box_dist(
                    *seg, px - half, y - half, px + half, y + half
                )
                if d <= g.radius:
                    cols.add(px)
        for lo, hi in _cols_to_spans(cols):
            triples.append((y, lo, hi))
    return Shape(triples)


def _brush_minshape(g: BrushStroke, half: float) -> Shape:
    segs = _path_segments(g.path)
    rbox = half * math.sqrt(2.0)
    if g.radius <= rbox:
        return Shape.empty()
    triples = []
    for y in _brush_rows(g, half):
        cols = set()
        for seg in segs:
            sx0 = min(seg[0], seg[2]) - g.radius
            sx1 = max(seg[0], seg[2]) + g.radius
            for px in range(math.floor(sx0), math.ceil(sx1) + 1):
                if px not in cols and _path_dist(g.path, px, y) + rbox <= g.radius:
                    cols.add(px)
        for lo, hi in _cols_to_spans(cols):
            triples.append((y, lo, hi))
    return Shape(triples)


def _cols_to_spans(cols) -> list[tuple[int, int]]:
    if not cols:
        return []
    xs = sorted(cols)
    spans = []
    lo = prev = xs[0]
    for x in xs[1:]:
        if x == prev + 1:
            prev = x
        else:
            spans.append((lo, prev))
            lo = prev = x
    spans.append((lo, prev))
    return spans


# -- public pixel-set operations ----------------------------------------------


@lru_cache(maxsize=4096)
def shape(g: Geometry, footprint_diameter: float = 2.0) -> Shape:
    """Every pixel whose footprint can receive paint from the geometry."""
    if footprint_diameter <= 0:
        raise ValueError("footprint diameter must be positive")
    half = footprint_diameter / 2.0
    if isinstance(g, Polygon):
        return _polygon_shape(g, half)
    if isinstance(g, BrushStroke):
        return _brush_shape(g, half)
    ls = shape(g.left, footprint_diameter)
    if g.op == "difference":
        return ls
    rs = shape(g.right, footprint_diameter)
    return ls | rs if g.op == "union" else ls & rs


@lru_cache(maxsize=4096)
def minshape(g: Geometry, footprint_diameter: float = 2.0) -> Shape:
    """Pixels the geometry influences completely (coverage exactly 1)."""
    if footprint_diameter <= 0:
        raise ValueError("footprint diameter must be positive")
    half = footprint_diameter / 2.0
    if isinstance(g, Polygon):
        return _polygon_minshape(g, half)
    if isinstance(g, BrushStroke):
        return _brush_minshape(g, half)
    lm = minshape(g.left, footprint_diameter)
    if g.op == "union":
        return lm | minshape(g.right, footprint_diameter)
    if g.op == "intersection":
        return lm & minshape(g.right, footprint_diameter)
    return lm - shape(g.right, footprint_diameter)


def maxshape(g: Geometry, footprint_diameter: float = 2.0) -> Shape:
    return shape(g, footprint_diameter) - minshape(g, footprint_diameter)


# -- rasterization --------------------------------------------------------------


class _PolygonCoverage:
    """Coverage evaluation for the boundary pixels of one polygon.

    Classifies pixels row by row (no edge / one chord / several edges) and
    defers all single-chord table lookups into one vectorized batch; rows
    with several edges share their sub-line crossings.
    """

    def __init__(self, g: Polygon, half: float, etab: EdgeTable, stab: SubspanTable):
        self.edges = sl.polygon_edges(g.vertices)
        self.half = half
        self.etab = etab
        self.stab = stab
        self.cells: dict[tuple[int, int], float] = {}
        self._single: list[tuple[int, int, float, float, float, bool]] = []

    def add_row(self, y: int, spans) -> None:
        half = self.half
        bel = band_edge_list(self.edges, y, half)
        hits: list[tuple[int, int, sl.Edge]] = []
        for e in bel.band_edges:
            ext = sl.band_x_extent(e, y - half, y + half)
            if ext is None:
                continue
            lo, hi = sl.pixels_touching(ext[0], ext[1], half)
            if lo <= hi:
                hits.append((lo, hi, e))
        top_cs = bel.top_crossings
        bot_cs = bel.bottom_crossings

        def parity(cs, cx: float) -> bool:
            return (len(cs) - bisect_right(cs, cx)) % 2 == 1

        multi: list[int] = []
        for s0, e0 in spans:
            for px in range(s0, e0 + 1):
                touching = [e for lo, hi, e in hits if lo <= px <= hi]
                if len(touching) == 1:
                    e = touching[0]
                    p0 = ((e[0] - px) / half, (e[1] - y) / half)
                    p1 = ((e[2] - px) / half, (e[3] - y) / half)
                    chord = sl.chord_through_box(p0, p1, 0.0, 0.0, 1.0)
                    if chord is not None:
                        (ax, ay), (bx, by) = chord
                        s = perimeter_param(ax, ay, self.etab.n)
                        t = perimeter_param(bx, by, self.etab.n)
                        # classify against the footprint corner farthest from
                        # the chord line: a vertex can sit exactly on a corner
                        # and make that corner's side test meaningless
                        dx, dy = bx - ax, by - ay
                        best_cross = 0.0
                        best_ins = False
                        for cxl, cyl, cs in (
                            (-1.0, -1.0, top_cs),
                            (1.0, -1.0, top_cs),
                            (-1.0, 1.0, bot_cs),
                            (1.0, 1.0, bot_cs),
                        ):
                            cr = dx * (cyl - ay) - dy * (cxl - ax)
                            if abs(cr) > abs(best_cross):
                                best_cross = cr
                                best_ins = parity(
                                    cs, px + cxl * half + _LINE_EPS
                                )
                        self._single.append(
                            (px, y, s, t, best_cross, best_ins)
                        )
                        continue
                    touching = []
                if not touching:
                    self.cells[(px, y)] = (
                        1.0 if sl.point_in_edges(self.edges, px, y) else 0.0
                    )
                else:
                    multi.append(px)
        if multi:
            cov = row_multi_coverage(
                self.stab,
                bel.band_edges,
                float(y),
                np.asarray(multi, dtype=np.float64),
                half,
            )
            for px, c in zip(multi, cov):
                self.cells[(px, y)] = float(c)

    def finish(self) -> dict[tuple[int, int], float]:
        if self._single:
            ss = np.asarray([e[2] for e in self._single])
            ts = np.asarray([e[3] for e in self._single])
            left = self.etab.coverage_left_batch(ss, ts)
            for (px, y, _, _, tl, inside), lv in zip(self._single, left):
                tl_cov = lv if tl >= 0 else 1.0 - lv
                self.cells[(px, y)] = tl_cov if inside else 1.0 - tl_cov
            self._single.clear()
        return self.cells


def _brush_coverage(g: BrushStroke, x: int, y: int, half: float, filt: GaussianFootprint) -> float:
    d = _path_dist(g.path, x, y)
    return filt.cdf1d((g.radius - d) / half)


def _combine_coverage(
    g: Combine, x: int, y: int, half: float, filt: GaussianFootprint
) -> float:
    n = filt.n
    step = 2.0 * half / n
    total = 0.0
    w = filt.cell_weights
    for j in range(n):
        sy = y - half + (j + 0.5) * step
        for i in range(n):
            if point_in_geometry(g, x - half + (i + 0.5) * step, sy):
                total += w[j, i]
    return min(1.0, total)


def rasterize(
    g: Geometry,
    fill: Fill,
    region: Shape,
    *,
    filt: GaussianFootprint | None = None,
    edge_table: EdgeTable | None = None,
    subspan_table: SubspanTable | None = None,
    shapes: tuple[Shape, Shape] | None = None,
    counter: Callable[[int], None] | None = None,
) -> Sprite:
    """Partial sprite of the filled geometry over `region`.

    `shapes` may carry precomputed (shape, minshape) to skip recomputation.
    `counter` receives the number of pixels actually computed.
    """
    if filt is None:
        filt, et, st = default_tables()
    else:
        et, st = edge_table, subspan_table
        if et is None or st is None:
            raise ValueError("explicit filter requires explicit tables")
    if region.is_empty():
        if counter:
            counter(0)
        return Sprite.empty()
    if shapes is None:
        full, mins = shape(g, filt.diameter), minshape(g, filt.diameter)
    else:
        full, mins = shapes
    half = filt.diameter / 2.0

    min_part = mins & region
    max_part = (full & region) - mins
    if counter:
        counter(min_part.area() + max_part.area())

    rows: dict[int, list[SpriteSpan]] = {}
    solid = isinstance(fill, Solid)
    for y, spans in min_part.rows:
        row = rows.setdefault(y, [])
        for s, e in spans:
            if solid:
                row.append((s, e, fill.color))
            else:
                row.append((s, e, _freeze(fill_row_values(fill, y, s, e))))

    if not max_part.is_empty():
        if isinstance(g, Polygon):
            pc = _PolygonCoverage(g, half, et, st)
            for y, spans in max_part.rows:
                pc.add_row(y, spans)
            cells = pc.finish()
            for y, spans in max_part.rows:
                row = rows.setdefault(y, [])
                for s, e in spans:
                    cov = [cells[(x, y)] for x in range(s, e + 1)]
                    vals = fill_row_values(fill, y, s, e) * np.asarray(cov)[:, None]
                    row.append((s, e, _freeze(vals)))
        else:
            for y, spans in max_part.rows:
                row = rows.setdefault(y, [])
                for s, e in spans:
                    xs = list(range(s, e + 1))
                    if isinstance(g, BrushStroke):
                        cov = [_brush_coverage(g, x, y, half, filt) for x in xs]
                    else:
                        cov = [_combine_coverage(g, x, y, half, filt) for x in xs]
                    vals = fill_row_values(fill, y, s, e) * np.asarray(cov)[:, None]
                    row.append((s, e, _freeze(vals)))

    out_rows = []
    for y in sorted(rows):
        out_rows.append((y, tuple(sorted(rows[y], key=lambda sp: sp[0]))))
    return Sprite(tuple(out_rows))


def rasterize_subpixel(
    g: Geometry,
    fill: Fill,
    region: Shape,
    filt: GaussianFootprint | None = None,
) -> dict[tuple[int, int], np.ndarray]:
    """Per-pixel (n, n, 4) subsample matrices over `region`, no antialiasing.

    Each subsample is classified by a point test at its centre; occupied
    subsamples carry the fill color evaluated at that position.
    """
    if filt is None:
        filt = default_tables()[0]
    n = filt.n
    half = filt.diameter / 2.0
    step = 2.0 * half / n
    out: dict[tuple[int, int], np.ndarray] = {}
    for y, spans in region.rows:
        for s, e in spans:
            for x in range(s, e + 1):
                m = np.zeros((n, n, 4), dtype=np.float64)
                for j in range(n):
                    sy = y - half + (j + 0.5) * step
                    for i in range(n):
                        sx = x - half + (i + 0.5) * step
                        if point_in_geometry(g, sx, sy):
                            m[j, i] = fill_color_at(fill, sx, sy)
                out[(x, y)] = _freeze(m)
    return out
