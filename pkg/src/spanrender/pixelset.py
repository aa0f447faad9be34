"""Sparse sets of integer pixel coordinates.

A :class:`Shape` stores a set of pixels as sorted scanlines, each scanline
holding disjoint, sorted, inclusive column spans.  Spans that touch
(``end + 1 == next.start``) are always merged, so equal sets have identical
internal structure and ``==`` is both structural and extensional.

Coordinates are signed integers.  The representation accepts any magnitude a
Python int can hold, but operations that move coordinates reject results
outside ``±COORD_LIMIT`` so downstream consumers can rely on a sane range.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from typing import Iterable, Iterator, Sequence

Span = tuple[int, int]
Row = tuple[int, tuple[Span, ...]]

COORD_LIMIT = 1 << 40

_SPAN_RE = re.compile(r"\s*(-?\d+)\s*-\s*(-?\d+)\s*$")


class CoordinateOverflow(ValueError):
    """A pixel coordinate left the supported ±COORD_LIMIT range."""


def _check_coord(v: int) -> int:
    if not -COORD_LIMIT <= v <= COORD_LIMIT:
        raise CoordinateOverflow(f"coordinate {v} outside ±{COORD_LIMIT}")
    return v


def _merge_spans(spans: list[Span]) -> tuple[Span, ...]:
    """Sort arbitrary inclusive spans and merge overlapping/touching ones."""
    if not spans:
        return ()
    spans.sort()
    out: list[Span] = []
    cs, ce = spans[0]
    for s, e in spans[1:]:
        if s <= ce + 1:
            if e > ce:
                ce = e
        else:
            out.append((cs, ce))
            cs, ce = s, e
    out.append((cs, ce))
    return tuple(out)


def _union_spans(a: Sequence[Span], b: Sequence[Span]) -> tuple[Span, ...]:
    # Linear merge of two canonical span lists, merging touching spans.
    out: list[Span] = []
    ia = ib = 0
    na, nb = len(a), len(b)
    cs = ce = None
    while ia < na or ib < nb:
        if ib >= nb or (ia < na and a[ia][0] <= b[ib][0]):
            s, e = a[ia]
            ia += 1
        else:
            s, e = b[ib]
            ib += 1
        if cs is None:
            cs, ce = s, e
        elif s <= ce + 1:
            if e > ce:
                ce = e
        else:
            out.append((cs, ce))
            cs, ce = s, e
    if cs is not None:
        out.append((cs, ce))
    return tuple(out)


def _intersect_spans(a: Sequence[Span], b: Sequence[Span]) -> tuple[Span, ...]:
    out: list[Span] = []
    ia = ib = 0
    na, nb = len(a), len(b)
    while ia < na and ib < nb:
        s = max(a[ia][0], b[ib][0])
        e = min(a[ia][1], b[ib][1])
        if s <= e:
            out.append((s, e))
        if a[ia][1] < b[ib][1]:
            ia += 1
        else:
            ib += 1
    return tuple(out)


def _subtract_spans(a: Sequence[Span], b: Sequence[Span]) -> tuple[Span, ...]:
    out: list[Span] = []
    ib = 0
    nb = len(b)
    for s, e in a:
        cur = s
        while ib < nb and b[ib][1] < cur:
            ib += 1
        j = ib
        while j < nb and b[j][0] <= e:
            bs, be = b[j]
            if bs > cur:
                out.append((cur, bs - 1))
            cur = max(cur, be + 1)
            if be > e:
                break
            j += 1
        if cur <= e:
            out.append((cur, e))
    return tuple(out)


def _dilate_spans(spans: Sequence[Span], w: int) -> tuple[Span, ...]:
    if w == 0:
        return tuple(spans)
    out: list[Span] = []
    cs = ce = None
    for s, e in spans:
        s, e = s - w, e + w
        if cs is None:
            cs, ce = s, e
        elif s <= ce + 1:
            ce = max(ce, e)
        else:
            out.append((cs, ce))
            cs, ce = s, e
    if cs is not None:
        out.append((cs, ce))
    return tuple(out)


class Shape:
    """Immutable sparse pixel set in canonical scanline-of-spans form."""

    __slots__ = ("_rows",)

    def __init__(self, spans: Iterable[tuple[int, int, int]] = ()):
        """Build from an iterable of ``(y, start, end)`` triples.

        Triples may arrive in any order and may overlap; they are normalized.
        Triples with ``end < start`` are ignored.
        """
        by_row: dict[int, list[Span]] = {}
        for y, s, e in spans:
            if e < s:
                continue
            _check_coord(y)
            _check_coord(s)
            _check_coord(e)
            by_row.setdefault(y, []).append((s, e))
        self._rows = tuple(
            (y, _merge_spans(by_row[y])) for y in sorted(by_row)
        )

    @classmethod
    def _wrap(cls, rows: tuple[Row, ...]) -> "Shape":
        s = object.__new__(cls)
        s._rows = rows
        return s

    @classmethod
    def empty(cls) -> "Shape":
        return _EMPTY

    @classmethod
    def from_rect(cls, x0: int, y0: int, x1: int, y1: int) -> "Shape":
        """Filled inclusive rectangle; empty if x1 < x0 or y1 < y0."""
        if x1 < x0 or y1 < y0:
            return _EMPTY
        for v in (x0, y0, x1, y1):
            _check_coord(v)
        return cls._wrap(tuple((y, ((x0, x1),)) for y in range(y0, y1 + 1)))

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, int]]) -> "Shape":
        return cls((y, x, x) for x, y in points)

    # -- queries ---------------------------------------------------------

    @property
    def rows(self) -> tuple[Row, ...]:
        return self._rows

    def is_empty(self) -> bool:
        return not self._rows

    def __bool__(self) -> bool:
        return bool(self._rows)

    def area(self) -> int:
        return sum(e - s + 1 for _, spans in self._rows for s, e in spans)

    def span_count(self) -> int:
        return sum(len(spans) for _, spans in self._rows)

    def contains(self, x: int, y: int) -> bool:
        spans = self.row_spans(y)
        if not spans:
            return False
        j = bisect_right(spans, (x, COORD_LIMIT + 1)) - 1
        return j >= 0 and spans[j][0] <= x <= spans[j][1]

    def row_spans(self, y: int) -> tuple[Span, ...]:
        # (y,) sorts before any (y, spans) row, so bisect_left lands on it.
        i = bisect_left(self._rows, (y,))
        if i < len(self._rows) and self._rows[i][0] == y:
            return self._rows[i][1]
        return ()

    def bounds(self) -> tuple[int, int, int, int] | None:
        """Inclusive (x0, y0, x1, y1) bounding box, or None when empty."""
        if not self._rows:
            return None
        x0 = min(spans[0][0] for _, spans in self._rows)
        x1 = max(spans[-1][1] for _, spans in self._rows)
        return (x0, self._rows[0][0], x1, self._rows[-1][0])

    def pixels(self) -> Iterator[tuple[int, int]]:
        for y, spans in self._rows:
            for s, e in spans:
                for x in range(s, e + 1):
                    yield (x, y)

    # -- set algebra -----------------------------------------------------

    def union(self, other: "Shape") -> "Shape":
        ra, rb = self._rows, other._rows
        if not ra:
            return other
        if not rb:
            return self
        rows: list[Row] = []
        ia = ib = 0
        while ia < len(ra) and ib < len(rb):
            ya, yb = ra[ia][0], rb[ib][0]
            if ya < yb:
                rows.append(ra[ia])
                ia += 1
            elif yb < ya:
                rows.append(rb[ib])
                ib += 1
            else:
                rows.append((ya, _union_spans(ra[ia][1], rb[ib][1])))
                ia += 1
                ib += 1
        rows.extend(ra[ia:])
        rows.extend(rb[ib:])
        return Shape._wrap(tuple(rows))

    def intersect(self, other: "Shape") -> "Shape":
        rows: list[Row] = []
        ra, rb = self._rows, other._rows
        ia = ib = 0
        while ia < len(ra) and ib < len(rb):
            ya, yb = ra[ia][0], rb[ib][0]
            if ya < yb:
                ia += 1
            elif yb < ya:
                ib += 1
            else:
                spans = _intersect_spans(ra[ia][1], rb[ib][1])
                if spans:
                    rows.append((ya, spans))
                ia += 1
                ib += 1
        return Shape._wrap(tuple(rows))

    def subtract(self, other: "Shape") -> "Shape":
        if not other._rows or not self._rows:
            return self
        rows: list[Row] = []
        rb = other._rows
        ib = 0
        nb = len(rb)
        for y, spans in self._rows:
            while ib < nb and rb[ib][0] < y:
                ib += 1
            if ib < nb and rb[ib][0] == y:
                spans = _subtract_spans(spans, rb[ib][1])
            if spans:
                rows.append((y, spans))
        return Shape._wrap(tuple(rows))

    def translate(self, dx: int, dy: int) -> "Shape":
        if dx == 0 and dy == 0:
            return self
        if self._rows:
            b = self.bounds()
            for v in (b[0] + dx, b[2] + dx, b[1] + dy, b[3] + dy):
                _check_coord(v)
        return Shape._wrap(
            tuple(
                (y + dy, tuple((s + dx, e + dx) for s, e in spans))
                for y, spans in self._rows
            )
        )

    def dilate_rect(self, w: int, h: int) -> "Shape":
        """Minkowski sum with the (2w+1)×(2h+1) pixel rectangle."""
        if w < 0 or h < 0:
            raise ValueError("dilation extents must be >= 0")
        if not self._rows or (w == 0 and h == 0):
            return self
        b = self.bounds()
        for v in (b[0] - w, b[2] + w, b[1] - h, b[3] + h):
            _check_coord(v)
        wide = [(y, _dilate_spans(spans, w)) for y, spans in self._rows]
        if h == 0:
            return Shape._wrap(tuple(wide))
        acc: dict[int, tuple[Span, ...]] = {}
        for y, spans in wide:
            for dy in range(-h, h + 1):
                prev = acc.get(y + dy)
                acc[y + dy] = spans if prev is None else _union_spans(prev, spans)
        return Shape._wrap(tuple((y, acc[y]) for y in sorted(acc)))

    __or__ = union
    __and__ = intersect
    __sub__ = subtract

    # -- equality / debug ------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Shape) and self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        n = self.area()
        if n == 0:
            return "Shape(empty)"
        return f"Shape({n} px, rows {self._rows[0][0]}..{self._rows[-1][0]})"

    def to_text(self) -> str:
        """One line per scanline: ``y: s0-e0, s1-e1, ...``."""
        return "\n".join(
            f"{y}: " + ", ".join(f"{s}-{e}" for s, e in spans)
            for y, spans in self._rows
        )

    @classmethod
    def from_text(cls, text: str) -> "Shape":
        triples: list[tuple[int, int, int]] = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            ypart, _, rest = line.partition(":")
            y = int(ypart)
            for item in rest.split(","):
                m = _SPAN_RE.match(item)
                if not m:
                    raise ValueError(f"bad span {item!r} in line {line!r}")
                triples.append((y, int(m.group(1)), int(m.group(2))))
        return cls(triples)


_EMPTY = Shape._wrap(())


# Functional aliases -- handy for code written in terms of free operations.

def intersect(a: Shape, b: Shape) -> Shape:
    return a.intersect(b)


def union(a: Shape, b: Shape) -> Shape:
    return a.union(b)


def subtract(a: Shape, b: Shape) -> Shape:
    return a.subtract(b)


def translate(a: Shape, dx: int, dy: int) -> Shape:
    return a.translate(dx, dy)


def dilate_rect(a: Shape, w: int, h: int) -> Shape:
    return a.dilate_rect(w, h)


def area(a: Shape) -> int:
    return a.area()


def is_empty(a: Shape) -> bool:
    return a.is_empty()


def contains(a: Shape, x: int, y: int) -> bool:
    return a.contains(x, y)


def from_rect(x0: int, y0: int, x1: int, y1: int) -> Shape:
    return Shape.from_rect(x0, y0, x1, y1)
