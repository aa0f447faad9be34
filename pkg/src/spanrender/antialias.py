"""Reconstruction filter and precomputed pixel-coverage tables.

The filter is a gaussian truncated to a square footprint whose side is twice
the interpixel spacing (sigma = diameter / 4, renormalized after truncation).
Coverage of a pixel is the filter mass over the part of its footprint lying
inside the geometry.

Two tables serve the two situations the rasterizer meets on boundary pixels:

* ``EdgeTable`` -- exactly one edge crosses the footprint.  Keyed by the two
  chord endpoints on the footprint perimeter (quantized to ``4n`` positions)
  plus which side to integrate; the fourfold rotational symmetry of the
  filter folds storage to a quarter.  Lookups interpolate between adjacent
  perimeter positions, so quantization error stays well under 0.01.
* ``SubspanTable`` -- several edges cross.  The footprint is cut into ``n``
  horizontal subpixel rows; the geometry's interior intervals along each row
  are accumulated through a per-row integral table.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .scanline import Edge, crossings

_SQRT2 = math.sqrt(2.0)


class FilterError(ValueError):
    """Raised for non-normalizable or asymmetric filter definitions."""


class EdgeMissesFootprint(ValueError):
    """Single-edge coverage was asked for an edge outside the footprint."""


class GaussianFootprint:
    """Truncated gaussian over a square footprint, plus its discretization.

    footprint_diameter: side of the footprint square, in pixel units.
    granularity: subpixel grid resolution n (the grid is n x n).
    """

    def __init__(self, footprint_diameter: float = 2.0, granularity: int = 16):
        if footprint_diameter <= 0:
            raise FilterError("footprint diameter must be positive")
        if granularity < 2:
            raise FilterError("granularity must be at least 2")
        self.diameter = float(footprint_diameter)
        self.half = self.diameter / 2.0
        self.n = int(granularity)
        self.sigma = self.diameter / 4.0
        # CDF of the unit-footprint profile: local coordinates in [-1, 1].
        s = self.sigma / self.half  # sigma in local units
        raw = lambda v: 0.5 * (1.0 + math.erf(v / (s * _SQRT2)))
        lo, hi = raw(-1.0), raw(1.0)
        z = hi - lo
        if z <= 0:
            raise FilterError("filter does not normalize over its footprint")
        self._raw = raw
        self._lo = lo
        self._z = z
        self._s = s
        edges = np.linspace(-1.0, 1.0, self.n + 1)
        cdf = np.array([self.cdf1d(v) for v in edges])
        w1 = np.diff(cdf)
        w1 /= w1.sum()
        self.weights1d = w1
        w2 = np.outer(w1, w1)
        w2 /= w2.sum()
        self.cell_weights = w2  # [row j (y), col i (x)]

    def cdf1d(self, v: float) -> float:
        """Mass of the 1D profile below local coordinate v (clamped)."""
        if v <= -1.0:
            return 0.0
        if v >= 1.0:
            return 1.0
        return (self._raw(v) - self._lo) / self._z

    def density(self, x: float, y: float) -> float:
        """Normalized 2D density at local (x, y); zero outside the square."""
        if not (-1.0 <= x <= 1.0 and -1.0 <= y <= 1.0):
            return 0.0
        g = lambda v: math.exp(-v * v / (2 * self._s * self._s)) / (
            self._s * math.sqrt(2 * math.pi) * self._z
        )
        return g(x) * g(y)

    def validate(self) -> None:
        w = self.cell_weights
        if abs(w.sum() - 1.0) > 1e-6:
            raise FilterError("discretized weights do not sum to 1")
        for sym in (w[::-1, :], w[:, ::-1], w.T):
            if not np.allclose(w, sym, atol=1e-12):
                raise FilterError("filter lacks fourfold symmetry")


# -- footprint perimeter parameterization ----------------------------------
#
# Positions run clockwise (in y-down screen coordinates) starting at the
# top-left corner: side 0 is the top edge left-to-right, side 1 the right
# edge top-to-bottom, side 2 the bottom right-to-left, side 3 the left
# bottom-to-top.  There are 4n positions; one step is (2 / n) local units.


def perimeter_point(t: float, n: int) -> tuple[float, float]:
    q = 4.0 * n
    t = t % q
    side, u = divmod(t, n)
    c = -1.0 + 2.0 * u / n
    if side == 0:
        return (c, -1.0)
    if side == 1:
        return (1.0, c)
    if side == 2:
        return (-c, 1.0)
    return (-1.0, -c)


def perimeter_param(x: float, y: float, n: int, tol: float = 1e-6) -> float:
    if abs(y + 1.0) <= tol and x < 1.0:
        return (x + 1.0) * n / 2.0
    if abs(x - 1.0) <= tol and y < 1.0:
        return n + (y + 1.0) * n / 2.0
    if abs(y - 1.0) <= tol and x > -1.0:
        return 2 * n + (1.0 - x) * n / 2.0
    if abs(x + 1.0) <= tol:
        return 3 * n + (1.0 - y) * n / 2.0
    raise EdgeMissesFootprint(f"point ({x}, {y}) not on footprint boundary")


def _wrap_dist(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _cross(ax, ay, bx, by, px, py) -> float:
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _clip_square_left(a: tuple[float, float], b: tuple[float, float]):
    """Square [-1,1]^2 clipped to the side of a->b with positive cross."""
    poly = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
    out: list[tuple[float, float]] = []
    for i in range(len(poly)):
        p = poly[i]
        q = poly[(i + 1) % len(poly)]
        cp = _cross(a[0], a[1], b[0], b[1], p[0], p[1])
        cq = _cross(a[0], a[1], b[0], b[1], q[0], q[1])
        if cp >= 0:
            out.append(p)
        if (cp > 0 > cq) or (cp < 0 < cq):
            t = cp / (cp - cq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _halfplane_mass(filt: GaussianFootprint, a, b) -> float:
    """Filter mass over the square on the positive-cross side of a->b."""
    poly = _clip_square_left(a, b)
    if len(poly) < 3:
        return 0.0
    xs = sorted({p[0] for p in poly})
    total = 0.0
    nseg = len(poly)
    for xa, xb in zip(xs, xs[1:]):
        if xb - xa < 1e-14:
            continue
        mid = 0.5 * (xa + xb)
        hw = 0.5 * (xb - xa)
        for gx, gw in zip(_GL_X, _GL_W):
            x = mid + hw * gx
            ylo, yhi = math.inf, -math.inf
            for i in range(nseg):
                px, py = poly[i]
                qx, qy = poly[(i + 1) % nseg]
                if px == qx:
                    if px == x:
                        ylo = min(ylo, py, qy)
                        yhi = max(yhi, py, qy)
                    continue
                if (px - x) * (qx - x) <= 0.0:
                    t = (x - px) / (qx - px)
                    yv = py + t * (qy - py)
                    ylo = min(ylo, yv)
                    yhi = max(yhi, yv)
            if yhi <= ylo:
                continue
            gdens = math.exp(-x * x / (2 * filt._s**2)) / (
                filt._s * math.sqrt(2 * math.pi) * filt._z
            )
            total += gw * hw * gdens * (filt.cdf1d(yhi) - filt.cdf1d(ylo))
    return min(1.0, max(0.0, total))


class EdgeTable:
    """Chord-coverage table folded by the filter's 90-degree symmetry.

    Stored entries cover directed chords whose entry position lies on side 0;
    any other chord is rotated there first.  Values are the filter mass on
    the left of the directed chord, quantized to 16 bits.
    """

    # Chords whose endpoints are closer than this (perimeter steps) are
    # integrated directly: interpolation is unstable across the diagonal.
    DEGENERATE_STEPS = 2.0

    def __init__(self, filt: GaussianFootprint):
        self.filt = filt
        n = filt.n
        self.n = n
        self.positions = 4 * n
        table = np.zeros((n, 4 * n), dtype=np.uint16)
        for i in range(n):
            a = perimeter_point(float(i), n)
            for j in range(4 * n):
                if i == j:
                    continue
                b = perimeter_point(float(j), n)
                v = _halfplane_mass(filt, a, b)
                table[i, j] = int(round(v * 65535.0))
        self._table = table

    @property
    def nbytes(self) -> int:
        return self._table.nbytes

    def _lattice_left(self, i: int, j: int) -> float:
        q = self.positions
        i %= q
        j %= q
        # rotate entry onto side 0; rotation preserves orientation
        k = (i // self.n) * self.n
        ci = i - k
        cj = (j - k) % q
        return self._table[ci, cj] / 65535.0

    def coverage_left(self, s: float, t: float) -> float:
        """Filter mass left of the directed chord from perimeter s to t."""
        q = self.positions
        s %= q
        t %= q
        if _wrap_dist(s, t, q) <= self.DEGENERATE_STEPS:
            # near-degenerate chord: it cuts at most a sliver off a corner
            # (mass < 1e-3), so only the orientation matters; interpolation
            # would straddle the i == j discontinuity instead
            a = perimeter_point(s, self.n)
            b = perimeter_point(t, self.n)
            return 1.0 if _cross(a[0], a[1], b[0], b[1], 0.0, 0.0) > 0 else 0.0
        i0 = math.floor(s)
        j0 = math.floor(t)
        fs = s - i0
        ft = t - j0
        v00 = self._lattice_left(i0, j0)
        v01 = self._lattice_left(i0, j0 + 1)
        v10 = self._lattice_left(i0 + 1, j0)
        v11 = self._lattice_left(i0 + 1, j0 + 1)
        v = (
            v00 * (1 - fs) * (1 - ft)
            + v01 * (1 - fs) * ft
            + v10 * fs * (1 - ft)
            + v11 * fs * ft
        )
        return min(1.0, max(0.0, v))

    def coverage_left_batch(self, s: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Vectorized coverage_left over parameter arrays."""
        q = self.positions
        n = self.n
        s = np.asarray(s, dtype=np.float64) % q
        t = np.asarray(t, dtype=np.float64) % q
        d = np.abs(s - t) % q
        wd = np.minimum(d, q - d)
        degen = wd <= self.DEGENERATE_STEPS
        i0 = np.floor(s).astype(np.int64)
        j0 = np.floor(t).astype(np.int64)
        fs = s - i0
        ft = t - j0

        def lat(i, j):
            i = i % q
            j = j % q
            k = (i // n) * n
            return self._table[i - k, (j - k) % q].astype(np.float64) / 65535.0

        v = (
            lat(i0, j0) * (1 - fs) * (1 - ft)
            + lat(i0, j0 + 1) * (1 - fs) * ft
            + lat(i0 + 1, j0) * fs * (1 - ft)
            + lat(i0 + 1, j0 + 1) * fs * ft
        )
        if degen.any():
            for idx in np.flatnonzero(degen):
                v[idx] = self.coverage_left(float(s[idx]), float(t[idx]))
        return np.clip(v, 0.0, 1.0)

    def coverage(
        self,
        entry: tuple[float, float],
        exit: tuple[float, float],
        corner_inside: bool,
    ) -> float:
        """Coverage given the chord's boundary points (footprint-local).

        `corner_inside` says whether the footprint's top-left corner lies
        inside the geometry; the integral is taken over the chord side the
        geometry occupies.
        """
        s = perimeter_param(entry[0], entry[1], self.n)
        t = perimeter_param(exit[0], exit[1], self.n)
        left = self.coverage_left(s, t)
        tl_side = _cross(entry[0], entry[1], exit[0], exit[1], -1.0, -1.0)
        tl_cov = left if tl_side >= 0 else 1.0 - left
        return tl_cov if corner_inside else 1.0 - tl_cov


class SubspanTable:
    """Per-subpixel-row integrals of horizontal spans of the filter."""

    def __init__(self, filt: GaussianFootprint):
        self.filt = filt
        self.n = filt.n
        prefix = np.zeros((self.n, self.n + 1), dtype=np.float64)
        np.cumsum(filt.cell_weights, axis=1, out=prefix[:, 1:])
        self._prefix = prefix

    def lookup(self, start_x: int, start_y: int, length: int) -> float:
        """Integral of `length` subpixel cells starting at (start_x, start_y)."""
        if not (0 <= start_y < self.n):
            raise IndexError("subpixel row out of range")
        if not (0 <= start_x <= start_x + length <= self.n):
            raise IndexError("subpixel span out of range")
        row = self._prefix[start_y]
        return float(row[start_x + length] - row[start_x])

    def _cdf(self, j: int, x: float) -> float:
        """Piecewise-linear row CDF at fractional local x in [-1, 1]."""
        u = (x + 1.0) * self.n / 2.0
        u = min(float(self.n), max(0.0, u))
        i = min(self.n - 1, int(u))
        frac = u - i
        row = self._prefix[j]
        return float(row[i] + frac * (row[i + 1] - row[i]))

    def interval_mass(self, j: int, x0: float, x1: float) -> float:
        if x1 <= x0:
            return 0.0
        return self._cdf(j, x1) - self._cdf(j, x0)

    def row_line(self, j: int) -> float:
        """Local y of the centre line of subpixel row j."""
        return -1.0 + (2.0 * j + 1.0) / self.n

    def row_lines(self, j: int, k: int) -> list[float]:
        """k equally spaced sampling lines inside subpixel row j."""
        top = -1.0 + 2.0 * j / self.n
        step = 2.0 / (self.n * k)
        return [top + (i + 0.5) * step for i in range(k)]


def build_tables(filt: GaussianFootprint) -> tuple[EdgeTable, SubspanTable]:
    """Build both coverage tables; deterministic for a given filter."""
    filt.validate()
    return EdgeTable(filt), SubspanTable(filt)


def coverage_single_edge(
    table: EdgeTable,
    edge: tuple[tuple[float, float], tuple[float, float]],
    corner_inside: bool,
) -> float:
    """Coverage for a footprint crossed by exactly one edge.

    `edge` is given in footprint-local coordinates (centre origin, half-side
    1); it must cross the footprint square.
    """
    from .scanline import chord_through_box

    p0, p1 = edge
    chord = chord_through_box(p0, p1, 0.0, 0.0, 1.0)
    if chord is None:
        raise EdgeMissesFootprint(f"edge {edge} does not cross the footprint")
    return table.coverage(chord[0], chord[1], corner_inside)


def coverage_multi_edge(
    table: SubspanTable,
    edges: Sequence[Edge],
    offset: tuple[float, float] = (0.0, 0.0),
    scale: float = 1.0,
    lines_per_row: int = 8,
) -> float:
    """Coverage from interior spans accumulated per subpixel row.

    `edges` are in scene coordinates; `offset`/`scale` map scene to
    footprint-local coordinates (local = (scene - offset) / scale).  Each
    row's interval mass is averaged over `lines_per_row` sampling lines so
    slanted edges do not alias against the row grid.
    """
    ox, oy = offset
    total = 0.0
    inv = 1.0 / lines_per_row
    for j in range(table.n):
        row_sum = 0.0
        for ly in table.row_lines(j, lines_per_row):
            xs = crossings(edges, oy + ly * scale)
            for k in range(0, len(xs) - 1, 2):
                x0 = (xs[k] - ox) / scale
                x1 = (xs[k + 1] - ox) / scale
                row_sum += table.interval_mass(j, max(-1.0, x0), min(1.0, x1))
        total += row_sum * inv
    return min(1.0, max(0.0, total))


def row_multi_coverage(
    table: SubspanTable,
    edges: Sequence[Edge],
    y: float,
    pixel_xs: np.ndarray,
    half: float,
    lines_per_row: int = 8,
) -> np.ndarray:
    """Vectorized coverage_multi_edge for many pixels on one scanline.

    All pixels share the same sub-line crossings, so those are computed once
    and each pixel only clips the interior intervals to its own footprint.
    """
    n = table.n
    k = lines_per_row
    e = np.asarray(edges, dtype=np.float64)
    if e.size == 0:
        return np.zeros(len(pixel_xs))
    # sampling lines: k per subpixel row, n rows
    offs = (np.arange(n * k) + 0.5) * (2.0 / (n * k)) - 1.0
    lys = y + offs * half
    x0, y0, x1, y1 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    ymin = np.minimum(y0, y1)
    ymax = np.maximum(y0, y1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (lys[None, :] - y0[:, None]) / (y1 - y0)[:, None]
        xc = x0[:, None] + t * (x1 - x0)[:, None]
    valid = (ymin[:, None] <= lys[None, :]) & (lys[None, :] < ymax[:, None])
    xc = np.where(valid, xc, np.inf)
    if xc.shape[0] % 2:
        xc = np.vstack([xc, np.full((1, xc.shape[1]), np.inf)])
    xc.sort(axis=0)
    a = xc[0::2, :]  # (P, L) interval starts
    b = xc[1::2, :]
    px = np.asarray(pixel_xs, dtype=np.float64)[:, None, None]
    la = np.clip((a[None] - px) / half, -1.0, 1.0)
    lb = np.clip((b[None] - px) / half, -1.0, 1.0)
    lb = np.maximum(la, lb)
    # piecewise-linear per-row CDF of the horizontal filter profile
    rows = np.arange(n * k) // k  # table row per line
    prefix = table._prefix[rows]  # (L, n+1)
    flat = prefix.ravel()
    lbase = np.arange(n * k) * (n + 1)  # flat offset per line

    def cdf(v):
        u = np.clip((v + 1.0) * n / 2.0, 0.0, float(n))
        i = np.minimum(u.astype(np.int64), n - 1)
        frac = u - i
        idx = i + lbase  # broadcasts over (X, P, L)
        base = flat[idx]
        return base + frac * (flat[idx + 1] - base)

    mass = cdf(lb) - cdf(la)  # (X, P, L)
    cov = mass.sum(axis=(1, 2)) / k
    return np.clip(cov, 0.0, 1.0)


def resolve_subpixel(matrix: np.ndarray, filt: GaussianFootprint):
    """Collapse an (n, n, 4) premultiplied subsample matrix to one color."""
    from .sprite import Color

    if matrix.shape != (filt.n, filt.n, 4):
        raise ValueError(f"matrix must be ({filt.n}, {filt.n}, 4)")
    v = np.einsum("jk,jkc->c", filt.cell_weights, matrix)
    # repeated per-subsample composition can drift a hair past 1.0
    v = np.clip(v, 0.0, 1.0)
    return Color(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


_DEFAULT: tuple[GaussianFootprint, EdgeTable, SubspanTable] | None = None


def configured_granularity(env: dict | None = None) -> int:
    """Subpixel grid resolution, overridable via SPANRENDER_SUBPIXEL_N."""
    import os

    raw = (env if env is not None else os.environ).get("SPANRENDER_SUBPIXEL_N", "16")
    try:
        n = int(raw)
    except ValueError:
        raise FilterError(f"SPANRENDER_SUBPIXEL_N must be an integer, got {raw!r}")
    if not 2 <= n <= 64:
        raise FilterError(f"SPANRENDER_SUBPIXEL_N out of range [2, 64]: {n}")
    return n


def default_tables() -> tuple[GaussianFootprint, EdgeTable, SubspanTable]:
    """The shared filter (diameter 2) and its tables.

    Built once per process; the grid resolution honors the
    SPANRENDER_SUBPIXEL_N environment variable at first use.
    """
    global _DEFAULT
    if _DEFAULT is None:
        filt = GaussianFootprint(granularity=configured_granularity())
        et, st = build_tables(filt)
        _DEFAULT = (filt, et, st)
    return _DEFAULT
