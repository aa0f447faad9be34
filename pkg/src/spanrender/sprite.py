"""Sparse partial rasterizations (sprites) and front-to-back composition.

A sprite is a Shape whose spans carry premultiplied RGBA data.  A span's
payload is either a single :class:`Color` (a run: every pixel in the span has
that color) or a float64 array of per-pixel colors.  Pixels absent from a
sprite are fully transparent by convention.

Unlike Shape spans, sprite spans within a scanline may touch when their
payloads differ; ``shape_of`` normalizes.  All channel math is premultiplied:
composing A over B is ``A + (1 - alpha_A) * B`` channelwise.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .pixelset import Shape, _check_coord

# A pixel counts as finished (opaque) once alpha reaches this; below 8-bit
# quantization so finished pixels cannot change their exported value.
OPAQUE_ALPHA = 1.0 - 1.0 / 512.0

_EPS = 1e-12


class Color(NamedTuple):
    """Premultiplied RGBA, all channels in [0, 1], color channels <= alpha."""

    r: float
    g: float
    b: float
    a: float

    @classmethod
    def from_straight(cls, r: float, g: float, b: float, a: float) -> "Color":
        return cls(r * a, g * a, b * a, a)

    def to_straight(self) -> tuple[float, float, float, float]:
        if self.a <= _EPS:
            return (0.0, 0.0, 0.0, 0.0)
        return (self.r / self.a, self.g / self.a, self.b / self.a, self.a)

    def validate(self) -> "Color":
        for ch in self:
            if not -_EPS <= ch <= 1.0 + _EPS:
                raise ValueError(f"channel {ch} outside [0, 1]: {self}")
        if max(self.r, self.g, self.b) > self.a + 1e-9:
            raise ValueError(f"color channels exceed alpha: {self}")
        return self

    def over(self, below: "Color") -> "Color":
        w = 1.0 - self.a
        return Color(
            self.r + w * below.r,
            self.g + w * below.g,
            self.b + w * below.b,
            self.a + w * below.a,
        )

    def scaled(self, k: float) -> "Color":
        return Color(self.r * k, self.g * k, self.b * k, self.a * k)

    def is_opaque(self) -> bool:
        return self.a >= OPAQUE_ALPHA


TRANSPARENT = Color(0.0, 0.0, 0.0, 0.0)

Payload = Union[Color, np.ndarray]
SpriteSpan = tuple[int, int, Payload]  # inclusive columns + payload
SpriteRow = tuple[int, tuple[SpriteSpan, ...]]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def samples(values) -> np.ndarray:
    """Make an immutable (n, 4) premultiplied sample block."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError("samples must have shape (n, 4)")
    return _freeze(arr.copy())


def _payload_slice(p: Payload, lo: int, hi: int, span_start: int) -> Payload:
    if isinstance(p, Color):
        return p
    return p[lo - span_start : hi - span_start + 1]


def _payload_array(p: Payload, n: int) -> np.ndarray:
    if isinstance(p, Color):
        return np.broadcast_to(np.asarray(p, dtype=np.float64), (n, 4))
    return p


class Sprite:
    """Immutable sparse raster; rows sorted by y, spans sorted and disjoint."""

    __slots__ = ("_rows",)

    def __init__(self, rows: Sequence[SpriteRow] = ()):
        self._rows = tuple(rows)

    @classmethod
    def empty(cls) -> "Sprite":
        return _EMPTY_SPRITE

    @classmethod
    def solid(cls, shape: Shape, color: Color) -> "Sprite":
        """Constant-color sprite covering `shape`, all runs."""
        return cls(
            tuple(
                (y, tuple((s, e, color) for s, e in spans))
                for y, spans in shape.rows
            )
        )

    @property
    def rows(self) -> tuple[SpriteRow, ...]:
        return self._rows

    def is_empty(self) -> bool:
        return not self._rows

    def shape(self) -> Shape:
        return Shape(
            (y, s, e) for y, spans in self._rows for s, e, _ in spans
        )

    def pixel(self, x: int, y: int) -> Color | None:
        for ry, spans in self._rows:
            if ry != y:
                continue
            for s, e, p in spans:
                if s <= x <= e:
                    if isinstance(p, Color):
                        return p
                    return Color(*p[x - s])
            return None
        return None

    def pixel_count(self) -> int:
        return sum(e - s + 1 for _, spans in self._rows for s, e, _ in spans)

    def iter_pixels(self) -> Iterator[tuple[int, int, Color]]:
        for y, spans in self._rows:
            for s, e, p in spans:
                if isinstance(p, Color):
                    for x in range(s, e + 1):
                        yield (x, y, p)
                else:
                    for i, x in enumerate(range(s, e + 1)):
                        yield (x, y, Color(*p[i]))

    def translate(self, dx: int, dy: int) -> "Sprite":
        if dx == 0 and dy == 0:
            return self
        if self._rows:
            ys = (self._rows[0][0] + dy, self._rows[-1][0] + dy)
            for v in ys:
                _check_coord(v)
            for y, spans in self._rows:
                _check_coord(spans[0][0] + dx)
                _check_coord(spans[-1][1] + dx)
        return Sprite(
            tuple(
                (y + dy, tuple((s + dx, e + dx, p) for s, e, p in spans))
                for y, spans in self._rows
            )
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sprite):
            return NotImplemented
        if len(self._rows) != len(other._rows):
            return False
        for (ya, sa), (yb, sb) in zip(self._rows, other._rows):
            if ya != yb or len(sa) != len(sb):
                return False
            for (s0, e0, p0), (s1, e1, p1) in zip(sa, sb):
                if s0 != s1 or e0 != e1:
                    return False
                if isinstance(p0, Color) != isinstance(p1, Color):
                    return False
                if isinstance(p0, Color):
                    if p0 != p1:
                        return False
                elif not np.array_equal(p0, p1):
                    return False
        return True

    def __repr__(self) -> str:
        return f"Sprite({self.pixel_count()} px, {len(self._rows)} rows)"


_EMPTY_SPRITE = Sprite(())


def shape_of(s: Sprite) -> Shape:
    return s.shape()


def translate_sprite(s: Sprite, dx: int, dy: int) -> Sprite:
    return s.translate(dx, dy)


def _mask_to_spans(mask: np.ndarray, x0: int) -> list[tuple[int, int]]:
    """Runs of True in a boolean vector, offset to absolute columns."""
    if not mask.any():
        return []
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return [
        (x0 + int(a), x0 + int(b) - 1) for a, b in zip(edges[::2], edges[1::2])
    ]


def opaque_shape(s: Sprite) -> Shape:
    """Pixels whose alpha has reached the finished threshold."""
    triples = []
    for y, spans in s._rows:
        for st, en, p in spans:
            if isinstance(p, Color):
                if p.a >= OPAQUE_ALPHA:
                    triples.append((y, st, en))
            else:
                for a, b in _mask_to_spans(p[:, 3] >= OPAQUE_ALPHA, st):
                    triples.append((y, a, b))
    return Shape(triples)


def restrict(s: Sprite, r: Shape) -> Sprite:
    """Keep only pixels inside r; runs split but remain runs."""
    out_rows: list[SpriteRow] = []
    for y, spans in s._rows:
        rspans = r.row_spans(y)
        if not rspans:
            continue
        out_spans: list[SpriteSpan] = []
        ir = 0
        for st, en, p in spans:
            while ir < len(rspans) and rspans[ir][1] < st:
                ir += 1
            j = ir
            while j < len(rspans) and rspans[j][0] <= en:
                lo = max(st, rspans[j][0])
                hi = min(en, rspans[j][1])
                if lo <= hi:
                    out_spans.append((lo, hi, _payload_slice(p, lo, hi, st)))
                if rspans[j][1] > en:
                    break
                j += 1
        if out_spans:
            out_rows.append((y, tuple(out_spans)))
    return Sprite(tuple(out_rows))


def merge_disjoint(a: Sprite, b: Sprite) -> Sprite:
    """Union of two sprites with disjoint shapes (caller guarantees)."""
    if a.is_empty():
        return b
    if b.is_empty():
        return a
    rows: dict[int, list[SpriteSpan]] = {}
    for src in (a, b):
        for y, spans in src.rows:
            rows.setdefault(y, []).extend(spans)
    out: list[SpriteRow] = []
    for y in sorted(rows):
        spans = sorted(rows[y], key=lambda sp: sp[0])
        for (s0, e0, _), (s1, _, _) in zip(spans, spans[1:]):
            if s1 <= e0:
                raise ValueError("merge_disjoint: overlapping sprites")
        out.append((y, tuple(spans)))
    return Sprite(tuple(out))


def _row_boundaries(spans_a, spans_b) -> list[int]:
    cuts = set()
    for s, e, _ in spans_a:
        cuts.add(s)
        cuts.add(e + 1)
    for s, e, _ in spans_b:
        cuts.add(s)
        cuts.add(e + 1)
    return sorted(cuts)


def _covering(spans, x: int, start_idx: int) -> tuple[int, SpriteSpan | None]:
    i = start_idx
    while i < len(spans) and spans[i][1] < x:
        i += 1
    if i < len(spans) and spans[i][0] <= x:
        return i, spans[i]
    return i, None


def compose_under(above: Sprite, below: Sprite) -> tuple[Sprite, Shape]:
    """Compose `below` under `above` (front-to-back accumulation step).

    Returns the composite plus the set of `below` pixels that became opaque
    in the composite.  Where two runs overlap, the overlap stays a run.
    """
    if above.is_empty():
        return below, opaque_shape(below)
    if below.is_empty():
        return above, Shape.empty()

    finished: list[tuple[int, int, int]] = []
    out_rows: list[SpriteRow] = []
    rows_a = dict(above.rows)
    rows_b = dict(below.rows)
    for y in sorted(set(rows_a) | set(rows_b)):
        sa = rows_a.get(y, ())
        sb = rows_b.get(y, ())
        if not sb:
            out_rows.append((y, sa))
            continue
        if not sa:
            out_rows.append((y, sb))
            for st, en, p in sb:
                _collect_opaque(p, st, en, finished, y)
            continue
        out_spans: list[SpriteSpan] = []
        cuts = _row_boundaries(sa, sb)
        ia = ib = 0
        for x0, x1 in zip(cuts, cuts[1:]):
            x1 -= 1  # inclusive
            ia, span_a = _covering(sa, x0, ia)
            ib, span_b = _covering(sb, x0, ib)
            if span_a is None and span_b is None:
                continue
            if span_b is None:
                st, en, p = span_a
                out_spans.append((x0, x1, _payload_slice(p, x0, x1, st)))
                continue
            pb = _payload_slice(span_b[2], x0, x1, span_b[0])
            if span_a is None:
                out_spans.append((x0, x1, pb))
                _collect_opaque(pb, x0, x1, finished, y)
                continue
            pa = _payload_slice(span_a[2], x0, x1, span_a[0])
            if isinstance(pa, Color) and isinstance(pb, Color):
                c = pa.over(pb)
                out_spans.append((x0, x1, c))
                if c.a >= OPAQUE_ALPHA:
                    finished.append((y, x0, x1))
            else:
                n = x1 - x0 + 1
                arr_a = _payload_array(pa, n)
                arr_b = _payload_array(pb, n)
                out = arr_a + (1.0 - arr_a[:, 3:4]) * arr_b
                out_spans.append((x0, x1, _freeze(out)))
                for a, b in _mask_to_spans(out[:, 3] >= OPAQUE_ALPHA, x0):
                    finished.append((y, a, b))
        out_rows.append((y, _coalesce_runs(out_spans)))
    return Sprite(tuple(out_rows)), Shape(finished)


def _collect_opaque(p: Payload, st: int, en: int, acc, y: int) -> None:
    if isinstance(p, Color):
        if p.a >= OPAQUE_ALPHA:
            acc.append((y, st, en))
    else:
        for a, b in _mask_to_spans(p[:, 3] >= OPAQUE_ALPHA, st):
            acc.append((y, a, b))


def _coalesce_runs(spans: list[SpriteSpan]) -> tuple[SpriteSpan, ...]:
    """Merge adjacent runs of identical color produced by segment cuts."""
    out: list[SpriteSpan] = []
    for sp in spans:
        if (
            out
            and isinstance(sp[2], Color)
            and isinstance(out[-1][2], Color)
            and out[-1][2] == sp[2]
            and out[-1][1] + 1 == sp[0]
        ):
            out[-1] = (out[-1][0], sp[1], sp[2])
        else:
            out.append(sp)
    return tuple(out)


# -- dense raster interop -------------------------------------------------


def new_surface(width: int, height: int, background: Color | None = None) -> np.ndarray:
    surf = np.zeros((height, width, 4), dtype=np.float64)
    if background is not None:
        surf[:, :] = background
    return surf


def blit(s: Sprite, surface: np.ndarray, background: Color, origin=(0, 0)) -> None:
    """Composite sprite over a constant background into a dense raster.

    Absent pixels take the background; pixels falling outside the surface are
    clipped.  `origin` is the scene coordinate of surface[0, 0].
    """
    surface[:, :] = background
    write_over(s, surface, origin)


def write_over(s: Sprite, surface: np.ndarray, origin=(0, 0)) -> None:
    ox, oy = origin
    h, w = surface.shape[:2]
    for y, spans in s.rows:
        ry = y - oy
        if not 0 <= ry < h:
            continue
        for st, en, p in spans:
            lo = max(st, ox)
            hi = min(en, ox + w - 1)
            if lo > hi:
                continue
            seg = _payload_array(_payload_slice(p, lo, hi, st), hi - lo + 1)
            dst = surface[ry, lo - ox : hi - ox + 1]
            dst[:] = seg + (1.0 - seg[:, 3:4]) * dst


def write_into(s: Sprite, surface: np.ndarray, origin=(0, 0)) -> None:
    """Replace surface pixels with sprite pixels (no blending)."""
    ox, oy = origin
    h, w = surface.shape[:2]
    for y, spans in s.rows:
        ry = y - oy
        if not 0 <= ry < h:
            continue
        for st, en, p in spans:
            lo = max(st, ox)
            hi = min(en, ox + w - 1)
            if lo > hi:
                continue
            seg = _payload_array(_payload_slice(p, lo, hi, st), hi - lo + 1)
            surface[ry, lo - ox : hi - ox + 1] = seg


def surface_to_straight_u8(surface: np.ndarray) -> np.ndarray:
    """Premultiplied float surface -> straight-alpha 8-bit RGBA."""
    a = surface[:, :, 3:4]
    safe = np.where(a > _EPS, a, 1.0)
    straight = np.empty_like(surface)
    straight[:, :, :3] = np.where(a > _EPS, surface[:, :, :3] / safe, 0.0)
    straight[:, :, 3:4] = a
    return np.clip(np.rint(straight * 255.0), 0, 255).astype(np.uint8)
