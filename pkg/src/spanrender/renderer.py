"""Front-to-back hidden surface removal over depth-ordered scenes.

Objects are visited front-most first.  For each object the loop intersects
the remaining update shape with the object's shape, rasterizes only that
part, composes it under the accumulator, and drops the newly opaque pixels
from the update shape; it stops as soon as nothing is left to update.

An optional subpixel mode keeps boundary (maxshape) pixels as n x n
subsample matrices inside the accumulator and runs the same hidden-surface
logic per subsample, which removes the blending error stacked antialiased
edges otherwise produce.  A subpixel-held pixel is finished only when every
subsample is opaque; leftovers are normalized through the filter when the
scene runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .antialias import GaussianFootprint, default_tables, resolve_subpixel
from .geometry import Fill, Geometry, minshape, rasterize, rasterize_subpixel, shape
from .pixelset import Shape
from .sprite import (
    OPAQUE_ALPHA,
    Color,
    Sprite,
    blit,
    compose_under,
    merge_disjoint,
    new_surface,
    restrict,
    shape_of,
)

BACKGROUND_ID = "background"


class FilterDepthExceeded(RuntimeError):
    """A filter's scene function recursed past the configured depth limit."""


class ContractViolation(RuntimeError):
    """A filter's scene function broke its render-shape contract."""


@dataclass(frozen=True)
class SceneObject:
    """Depth-ordered scene element: geometry + fill."""

    oid: str
    geometry: Geometry
    fill: Fill
    generation: int = 0

    is_filter = False

    def with_geometry(self, g: Geometry) -> "SceneObject":
        return replace(self, geometry=g)


@dataclass(frozen=True)
class Scene:
    """objects[0] is front-most; the optional background is behind everything
    and must be fully opaque."""

    objects: tuple[SceneObject, ...] = ()
    background: Color | None = None

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.background is not None and self.background.a < 1.0:
            raise ValueError("scene background must be opaque")

    def below(self, index: int) -> "Scene":
        return Scene(self.objects[index + 1 :], self.background)

    def index_of(self, oid: str) -> int:
        for i, o in enumerate(self.objects):
            if o.oid == oid:
                return i
        raise KeyError(oid)

    def get(self, oid: str) -> SceneObject:
        return self.objects[self.index_of(oid)]

    def without(self, oid: str) -> "Scene":
        return Scene(
            tuple(o for o in self.objects if o.oid != oid), self.background
        )

    def with_object_replaced(self, oid: str, new: SceneObject) -> "Scene":
        i = self.index_of(oid)
        objs = list(self.objects)
        objs[i] = new
        return Scene(tuple(objs), self.background)


_FIELDS = (
    "rasterized_pixels",
    "compose_ops",
    "cache_hits",
    "cache_misses",
    "subpixel_pixels",
)


class RenderStats:
    """Monotone per-object counters for one or more render passes."""

    def __init__(self):
        self.per_object: dict[str, dict[str, int]] = {}
        self.wall_ms: float = 0.0

    def _slot(self, oid: str) -> dict[str, int]:
        if oid not in self.per_object:
            self.per_object[oid] = {f: 0 for f in _FIELDS}
        return self.per_object[oid]

    def note(self, oid: str, fld: str, n: int = 1) -> None:
        self._slot(oid)[fld] += n

    def get(self, oid: str, fld: str) -> int:
        return self.per_object.get(oid, {}).get(fld, 0)

    def total(self, fld: str) -> int:
        return sum(d[fld] for d in self.per_object.values())

    def merge(self, other: "RenderStats") -> None:
        for oid, d in other.per_object.items():
            slot = self._slot(oid)
            for f, v in d.items():
                slot[f] += v

    def report(self) -> str:
        lines = ["stats v1", f"wall_ms {self.wall_ms:.3f}"]
        tot = " ".join(f"{f}={self.total(f)}" for f in _FIELDS)
        lines.append(f"totals {tot}")
        for oid in sorted(self.per_object):
            d = self.per_object[oid]
            vals = " ".join(f"{f}={d[f]}" for f in _FIELDS)
            lines.append(f"object {oid} {vals}")
        return "\n".join(lines) + "\n"


@dataclass
class RenderContext:
    """Shared machinery for one render pass (and nested filter passes)."""

    filt: GaussianFootprint
    edge_table: object
    subspan_table: object
    cache: object | None = None
    stats: RenderStats = field(default_factory=RenderStats)
    mode: str = "normal"
    depth: int = 0
    depth_limit: int = 16

    def child(self) -> "RenderContext":
        if self.depth + 1 > self.depth_limit:
            raise FilterDepthExceeded(
                f"filter recursion exceeded depth {self.depth_limit}"
            )
        return replace(self, depth=self.depth + 1)

    # -- cached geometry queries ------------------------------------------

    def object_shapes(self, obj: SceneObject) -> tuple[Shape, Shape]:
        if self.cache is not None:
            got = self.cache.get_shapes(obj)
            if got is not None:
                return got
        sh = shape(obj.geometry, self.filt.diameter)
        mn = minshape(obj.geometry, self.filt.diameter)
        if self.cache is not None:
            self.cache.put_shapes(obj, (sh, mn))
        return (sh, mn)

    def object_shape(self, obj: SceneObject) -> Shape:
        return self.object_shapes(obj)[0]

    def rasterize_object(self, obj: SceneObject, region: Shape) -> Sprite:
        """Rasterize with sprite-cache reuse and extension."""
        if region.is_empty():
            return Sprite.empty()
        shapes = self.object_shapes(obj)
        wanted = region & shapes[0]

        def count(n: int) -> None:
            self.stats.note(obj.oid, "rasterized_pixels", n)

        if self.cache is None:
            return rasterize(
                obj.geometry,
                obj.fill,
                region,
                filt=self.filt,
                edge_table=self.edge_table,
                subspan_table=self.subspan_table,
                shapes=shapes,
                counter=count,
            )
        entry = self.cache.get_sprite(obj)
        if entry is None:
            self.stats.note(obj.oid, "cache_misses")
            out = rasterize(
                obj.geometry,
                obj.fill,
                wanted,
                filt=self.filt,
                edge_table=self.edge_table,
                subspan_table=self.subspan_table,
                shapes=shapes,
                counter=count,
            )
            self.cache.put_sprite(obj, out, cost=wanted.area())
            return out
        have = shape_of(entry)
        missing = wanted - have
        if missing.is_empty():
            self.stats.note(obj.oid, "cache_hits")
            return restrict(entry, region)
        if (wanted & have).is_empty():
            self.stats.note(obj.oid, "cache_misses")
        else:
            self.stats.note(obj.oid, "cache_hits")
        extra = rasterize(
            obj.geometry,
            obj.fill,
            missing,
            filt=self.filt,
            edge_table=self.edge_table,
            subspan_table=self.subspan_table,
            shapes=shapes,
            counter=count,
        )
        merged = merge_disjoint(entry, extra)
        self.cache.put_sprite(obj, merged, cost=missing.area())
        return restrict(merged, region)


def make_context(
    *,
    cache=None,
    stats: RenderStats | None = None,
    mode: str = "normal",
    depth_limit: int = 16,
) -> RenderContext:
    filt, et, st = default_tables()
    return RenderContext(
        filt=filt,
        edge_table=et,
        subspan_table=st,
        cache=cache,
        stats=stats or RenderStats(),
        mode=mode,
        depth_limit=depth_limit,
    )


def render(
    scene: Scene,
    region: Shape,
    *,
    cache=None,
    stats: RenderStats | None = None,
    mode: str = "normal",
    depth_limit: int = 16,
    ctx: RenderContext | None = None,
) -> tuple[Sprite, RenderStats]:
    """Render `scene` restricted to `region`; returns (sprite, stats).

    The sprite's shape is a subset of `region` and equals it when the scene
    carries an opaque background.
    """
    if ctx is None:
        ctx = make_context(
            cache=cache, stats=stats, mode=mode, depth_limit=depth_limit
        )
    if mode == "subpixel" or ctx.mode == "subpixel":
        sprite = _render_subpixel(scene, region, ctx)
    else:
        sprite = _render_normal(scene, region, ctx)
    return sprite, ctx.stats


def _render_normal(scene: Scene, region: Shape, ctx: RenderContext) -> Sprite:
    acc = Sprite.empty()
    update = region
    for i, obj in enumerate(scene.objects):
        if update.is_empty():
            break
        if obj.is_filter:
            rshape = update & ctx.object_shape(obj)
            if rshape.is_empty():
                continue
            sprite, finished = obj.render_filtered(ctx, scene.below(i), rshape)
            acc, _ = compose_under(acc, sprite)
            ctx.stats.note(obj.oid, "compose_ops")
            update = update - finished
            continue
        rshape = update & ctx.object_shape(obj)
        if rshape.is_empty():
            continue
        sprite = ctx.rasterize_object(obj, rshape)
        acc, finished = compose_under(acc, sprite)
        ctx.stats.note(obj.oid, "compose_ops")
        update = update - finished
    if scene.background is not None and not update.is_empty():
        bg = Sprite.solid(update, scene.background)
        ctx.stats.note(BACKGROUND_ID, "rasterized_pixels", update.area())
        ctx.stats.note(BACKGROUND_ID, "compose_ops")
        acc, _ = compose_under(acc, bg)
    return acc


def _matrix_finished(m: np.ndarray) -> bool:
    return bool(np.all(m[:, :, 3] >= OPAQUE_ALPHA))


def _render_subpixel(scene: Scene, region: Shape, ctx: RenderContext) -> Sprite:
    filt = ctx.filt
    acc = Sprite.empty()
    update = region
    sub: dict[tuple[int, int], np.ndarray] = {}

    def resolve_finished() -> Shape:
        done = [p for p, m in sub.items() if _matrix_finished(m)]
        return _resolve_pixels(done)

    def _resolve_pixels(pixels) -> Shape:
        nonlocal acc
        if not pixels:
            return Shape.empty()
        resolved = Sprite(
            tuple(
                (y, tuple((x, x, resolve_subpixel(sub.pop((x, y)), filt)) for x, _ in row))
                for y, row in _group_pixels(pixels)
            )
        )
        acc = merge_disjoint(acc, resolved)
        return resolved.shape()

    for i, obj in enumerate(scene.objects):
        if update.is_empty():
            break
        if obj.is_filter:
            rshape = update & ctx.object_shape(obj)
            if rshape.is_empty():
                continue
            sprite, finished = obj.render_filtered(ctx, scene.below(i), rshape)
            ctx.stats.note(obj.oid, "compose_ops")
            # compose per-subsample where pixels are already subpixel-held
            sub_hits = [
                (x, y) for (x, y) in sub if rshape.contains(x, y)
            ]
            if sub_hits:
                for (x, y) in sub_hits:
                    c = sprite.pixel(x, y) or Color(0, 0, 0, 0)
                    m = sub[(x, y)]
                    m += (1.0 - m[:, :, 3:4]) * np.asarray(c)
                plain = sprite.shape() - Shape.from_points(sub_hits)
                acc, _ = compose_under(acc, restrict(sprite, plain))
            else:
                acc, _ = compose_under(acc, sprite)
            update = update - finished
            update = update - resolve_finished()
            continue

        full, mins = ctx.object_shapes(obj)
        rshape = update & full
        if rshape.is_empty():
            continue
        min_part = rshape & mins
        max_part = rshape - mins

        # pixels whose coverage is partial live as subsample matrices
        entering = [p for p in max_part.pixels() if p not in sub]
        if entering:
            ctx.stats.note(obj.oid, "subpixel_pixels", len(entering))
            entering_shape = Shape.from_points(entering)
            held = shape_of(acc) & entering_shape
            for (x, y) in entering:
                if held.contains(x, y):
                    c = acc.pixel(x, y)
                    m = np.empty((filt.n, filt.n, 4), dtype=np.float64)
                    m[:, :] = c
                else:
                    m = np.zeros((filt.n, filt.n, 4), dtype=np.float64)
                sub[(x, y)] = m
            if not held.is_empty():
                acc = restrict(acc, shape_of(acc) - held)

        # per-subsample hidden surface removal on all subpixel-held pixels
        touched = max_part | Shape.from_points(
            [p for p in min_part.pixels() if p in sub]
        )
        if not touched.is_empty():
            mats = rasterize_subpixel(obj.geometry, obj.fill, touched, filt)
            ctx.stats.note(obj.oid, "rasterized_pixels", len(mats))
            for p, s in mats.items():
                m = sub[p]
                m += (1.0 - m[:, :, 3:4]) * s
            ctx.stats.note(obj.oid, "compose_ops")

        plain_part = min_part - Shape.from_points(list(sub.keys()))
        if not plain_part.is_empty():
            sprite = ctx.rasterize_object(obj, plain_part)
            acc, fin = compose_under(acc, sprite)
            ctx.stats.note(obj.oid, "compose_ops")
            update = update - fin
        update = update - resolve_finished()

    if scene.background is not None and not update.is_empty():
        remaining_plain = update - Shape.from_points(list(sub.keys()))
        bgc = np.asarray(scene.background, dtype=np.float64)
        # only unfinished pixels may still receive paint: a filter may have
        # finished subpixel-held pixels (even transparent ones) already
        for p in [p for p in sub if update.contains(*p)]:
            m = sub[p]
            m += (1.0 - m[:, :, 3:4]) * bgc
        ctx.stats.note(BACKGROUND_ID, "rasterized_pixels", update.area())
        ctx.stats.note(BACKGROUND_ID, "compose_ops")
        update = update - resolve_finished()
        if not remaining_plain.is_empty():
            bg = Sprite.solid(remaining_plain, scene.background)
            acc, _ = compose_under(acc, bg)

    # normalize whatever is still subpixel-held
    _resolve_pixels(list(sub.keys()))
    return acc


def _group_pixels(pixels):
    rows: dict[int, list[tuple[int, int]]] = {}
    for (x, y) in pixels:
        rows.setdefault(y, []).append((x, y))
    for y in sorted(rows):
        yield y, sorted(rows[y])


def render_region(
    scene: Scene,
    rect: tuple[int, int, int, int],
    *,
    cache=None,
    stats: RenderStats | None = None,
    mode: str = "normal",
    depth_limit: int = 16,
) -> tuple[np.ndarray, RenderStats]:
    """Render an inclusive rectangle to a dense premultiplied surface."""
    x0, y0, x1, y1 = rect
    region = Shape.from_rect(x0, y0, x1, y1)
    sprite, st = render(
        scene, region, cache=cache, stats=stats, mode=mode, depth_limit=depth_limit
    )
    surf = new_surface(x1 - x0 + 1, y1 - y0 + 1)
    bg = scene.background if scene.background is not None else Color(0, 0, 0, 0)
    blit(sprite, surf, bg, origin=(x0, y0))
    return surf, st
