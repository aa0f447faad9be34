"""Filter objects: scene elements whose pixels depend on the scene below.

A filter bundles a geometry (only its alpha matters: where and how strongly
the filter acts), a *scene function* (rewrites the scene below and names the
reading shape that must be rendered first), a *filter function* (transforms
that rendering), and an *update function* (propagates damage shapes through
the filter when something behind it changes).

Rendering a filter: run the scene function, render the modified scene over
the reading shape, run the filter function, then blend the result with the
original scene in proportion to the filter geometry's alpha (original scene
pixels are only needed where that alpha is not opaque).  Every pixel the
filter emits counts as finished even when fully transparent, which is what
lets filters remove paint from the canvas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .geometry import (
    Affine,
    affine_apply,
    affine_invert,
    shape as geometry_shape,
    transform_fill,
    transform_geometry,
)
from .pixelset import Shape
from .renderer import (
    ContractViolation,
    RenderContext,
    Scene,
    SceneObject,
    render,
)
from .sprite import (
    Color,
    Payload,
    Sprite,
    _freeze,
    new_surface,
    opaque_shape,
    restrict,
    shape_of,
    write_into,
)


class SceneFnResult(NamedTuple):
    modified_scene: Scene
    reading_shape: Shape
    render_shape: Shape


SceneFn = Callable[[Scene, Shape], SceneFnResult]
FilterFn = Callable[[Sprite], Sprite]
UpdateFn = Callable[[Shape], Shape]


@dataclass(frozen=True)
class FilterObject(SceneObject):
    kind: str = "custom"
    params: tuple = ()
    scene_fn: SceneFn = None
    filter_fn: FilterFn = None
    update_fn: UpdateFn = None

    is_filter = True

    def render_filtered(
        self, ctx: RenderContext, scene_below: Scene, rshape: Shape
    ) -> tuple[Sprite, Shape]:
        return render_filter(self, scene_below, rshape, ctx)


def render_filter(
    f: FilterObject, scene_below: Scene, rshape: Shape, ctx: RenderContext
) -> tuple[Sprite, Shape]:
    """Render one filter object over `rshape`; returns (sprite, finished)."""
    child = ctx.child()  # guards runaway scene functions
    res = f.scene_fn(scene_below, rshape)
    if not (res.render_shape - rshape).is_empty():
        raise ContractViolation(
            f"filter {f.oid}: render shape escapes the requested shape"
        )
    base, _ = render(res.modified_scene, res.reading_shape, ctx=child)
    filtered = restrict(f.filter_fn(base), res.render_shape)

    galpha = ctx.rasterize_object(f, res.render_shape)
    blend_pixels = res.render_shape - opaque_shape(galpha)
    if blend_pixels.is_empty():
        original = Sprite.empty()
    else:
        original, _ = render(scene_below, blend_pixels, ctx=child)

    out = _blend_by_alpha(filtered, galpha, original, res.render_shape)
    return out, res.render_shape


def _blend_by_alpha(
    filtered: Sprite, galpha: Sprite, original: Sprite, region: Shape
) -> Sprite:
    """filtered*alpha + original*(1-alpha), clamped; covers all of region."""
    if region.is_empty():
        return Sprite.empty()
    x0, y0, x1, y1 = region.bounds()
    w, h = x1 - x0 + 1, y1 - y0 + 1
    fimg = new_surface(w, h)
    write_into(filtered, fimg, origin=(x0, y0))
    gimg = new_surface(w, h)
    write_into(galpha, gimg, origin=(x0, y0))
    oimg = new_surface(w, h)
    write_into(original, oimg, origin=(x0, y0))
    a = gimg[:, :, 3:4]
    out = np.clip(fimg * a + oimg * (1.0 - a), 0.0, 1.0)
    rows = []
    for y, spans in region.rows:
        row = []
        for s, e in spans:
            row.append((s, e, _freeze(out[y - y0, s - x0 : e - x0 + 1].copy())))
        rows.append((y, tuple(row)))
    return Sprite(tuple(rows))


def _map_payload(p: Payload, fn) -> Payload:
    if isinstance(p, Color):
        return fn(np.asarray(p, dtype=np.float64)[None, :])[0]
    return _freeze(fn(np.asarray(p)))


def _map_sprite(s: Sprite, fn) -> Sprite:
    rows = []
    for y, spans in s.rows:
        row = []
        for st, en, p in spans:
            q = _map_payload(p, fn)
            row.append((st, en, Color(*q) if isinstance(p, Color) else q))
        rows.append((y, tuple(row)))
    return Sprite(tuple(rows))


# -- built-in filters --------------------------------------------------------


def builtin_blur(
    oid: str,
    kernel_w: int,
    kernel_h: int,
    geometry,
    fill,
    generation: int = 0,
) -> FilterObject:
    """Box blur of the scene below, acting inside the filter geometry."""
    if kernel_w < 1 or kernel_h < 1 or kernel_w % 2 == 0 or kernel_h % 2 == 0:
        raise ValueError("blur kernel sides must be odd and >= 1")
    rx, ry = kernel_w // 2, kernel_h // 2
    own_shape = geometry_shape(geometry)

    def scene_fn(scene: Scene, shp: Shape) -> SceneFnResult:
        return SceneFnResult(scene, shp.dilate_rect(rx, ry), shp)

    def filter_fn(base: Sprite) -> Sprite:
        return _box_convolve(base, kernel_w, kernel_h)

    def update_fn(u: Shape) -> Shape:
        return u.dilate_rect(rx, ry) & own_shape

    return FilterObject(
        oid=oid,
        geometry=geometry,
        fill=fill,
        generation=generation,
        kind="blur",
        params=(kernel_w, kernel_h),
        scene_fn=scene_fn,
        filter_fn=filter_fn,
        update_fn=update_fn,
    )


def _box_convolve(s: Sprite, kw: int, kh: int) -> Sprite:
    if s.is_empty() or (kw == 1 and kh == 1):
        return s
    b = shape_of(s).bounds()
    x0, y0, x1, y1 = b
    w, h = x1 - x0 + 1, y1 - y0 + 1
    padded = new_surface(w + kw - 1, h + kh - 1)
    write_into(s, padded, origin=(x0 - (kw // 2), y0 - (kh // 2)))
    acc = np.zeros((h, w, 4), dtype=np.float64)
    for dy in range(kh):
        for dx in range(kw):
            acc += padded[dy : dy + h, dx : dx + w]
    acc *= 1.0 / (kw * kh)
    rows = []
    for y in range(y0, y1 + 1):
        rows.append((y, ((x0, x1, _freeze(acc[y - y0].copy())),)))
    return Sprite(tuple(rows))


def builtin_hole(
    oid: str,
    geometry,
    fill,
    target: str = "all",
    generation: int = 0,
) -> FilterObject:
    """Cut a hole through the whole scene below, or through one object.

    `target` names an object id, or "all".  A target id that is not present
    below the filter (for instance because it sits in front) degrades to
    identity behavior; id existence against the scene file is the parser's
    job.
    """

    def scene_fn(scene: Scene, shp: Shape) -> SceneFnResult:
        if target == "all":
            return SceneFnResult(Scene((), None), shp, shp)
        try:
            modified = scene.without(target)
        except KeyError:
            modified = scene
        return SceneFnResult(modified, shp, shp)

    return FilterObject(
        oid=oid,
        geometry=geometry,
        fill=fill,
        generation=generation,
        kind="hole",
        params=(target,),
        scene_fn=scene_fn,
        filter_fn=lambda s: s,
        update_fn=lambda u: Shape.empty(),
    )


_LUMA = np.array([0.2126, 0.7152, 0.0722])


def builtin_monochrome(oid: str, geometry, fill, generation: int = 0) -> FilterObject:
    """Convert the scene below to luminance gray, preserving alpha."""

    def filter_fn(s: Sprite) -> Sprite:
        def to_gray(arr: np.ndarray) -> np.ndarray:
            out = np.empty_like(arr)
            lum = arr[:, :3] @ _LUMA
            out[:, 0] = out[:, 1] = out[:, 2] = lum
            out[:, 3] = arr[:, 3]
            return out

        return _map_sprite(s, to_gray)

    return FilterObject(
        oid=oid,
        geometry=geometry,
        fill=fill,
        generation=generation,
        kind="monochrome",
        params=(),
        scene_fn=lambda scene, shp: SceneFnResult(scene, shp, shp),
        filter_fn=filter_fn,
        update_fn=lambda u: Shape.empty(),
    )


def builtin_affine(
    oid: str,
    matrix: Affine,
    geometry,
    fill,
    generation: int = 0,
) -> FilterObject:
    """Show the scene below mapped through an affine transform.

    Content originally at point q appears at matrix(q): the scene function
    pre-transforms every object's geometry, so rendering stays inside the
    requested shape and the reading shape is the input shape unaltered.
    """
    affine_invert(matrix)  # rejects singular transforms at construction
    fp = ",".join(f"{v:.17g}" for v in matrix)

    def scene_fn(scene: Scene, shp: Shape) -> SceneFnResult:
        moved = []
        for o in scene.objects:
            # derived entries are keyed by source content, not just its
            # generation: interactive previews mutate geometry without
            # bumping generations, and a stale transformed sprite must miss
            token = hash((o.geometry, o.fill, o.generation)) & 0x7FFFFFFF
            moved.append(
                SceneObject(
                    oid=f"{o.oid}@{oid}:{fp}",
                    geometry=transform_geometry(o.geometry, matrix),
                    fill=transform_fill(o.fill, matrix),
                    generation=token,
                )
            )
        return SceneFnResult(Scene(tuple(moved), scene.background), shp, shp)

    own_shape = geometry_shape(geometry)

    def update_fn(u: Shape) -> Shape:
        # forward image of the damaged pixels, rounded outward
        out = Shape.empty()
        for y, spans in u.rows:
            for s, e in spans:
                corners = [
                    affine_apply(matrix, (s - 1.0, y - 1.0)),
                    affine_apply(matrix, (e + 1.0, y - 1.0)),
                    affine_apply(matrix, (s - 1.0, y + 1.0)),
                    affine_apply(matrix, (e + 1.0, y + 1.0)),
                ]
                xs = [p[0] for p in corners]
                ys = [p[1] for p in corners]
                out = out | Shape.from_rect(
                    math.floor(min(xs)) - 1,
                    math.floor(min(ys)) - 1,
                    math.ceil(max(xs)) + 1,
                    math.ceil(max(ys)) + 1,
                )
        return out & own_shape

    return FilterObject(
        oid=oid,
        geometry=geometry,
        fill=fill,
        generation=generation,
        kind="affine",
        params=tuple(matrix),
        scene_fn=scene_fn,
        filter_fn=lambda s: s,
        update_fn=update_fn,
    )


def identity_filter(oid: str, geometry, fill, generation: int = 0) -> FilterObject:
    """Filter that shows the scene below unchanged (testing aid)."""
    return FilterObject(
        oid=oid,
        geometry=geometry,
        fill=fill,
        generation=generation,
        kind="identity",
        params=(),
        scene_fn=lambda scene, shp: SceneFnResult(scene, shp, shp),
        filter_fn=lambda s: s,
        update_fn=lambda u: Shape.empty(),
    )


def rebuild_filter(
    f: FilterObject, geometry=None, fill=None
) -> FilterObject:
    """Reconstruct a built-in filter around new geometry or fill.

    The factories close over the geometry (reading shapes, damage clipping),
    so editing a filter must rebind those closures rather than just swapping
    the field.  Transform parameters (blur kernel, affine matrix, hole
    target) ride along unchanged.
    """
    geometry = f.geometry if geometry is None else geometry
    fill = f.fill if fill is None else fill
    if f.kind == "blur":
        return builtin_blur(
            f.oid, f.params[0], f.params[1], geometry, fill, generation=f.generation
        )
    if f.kind == "hole":
        return builtin_hole(
            f.oid, geometry, fill, target=f.params[0], generation=f.generation
        )
    if f.kind == "affine":
        return builtin_affine(
            f.oid, tuple(f.params), geometry, fill, generation=f.generation
        )
    if f.kind == "monochrome":
        return builtin_monochrome(f.oid, geometry, fill, generation=f.generation)
    if f.kind == "identity":
        return identity_filter(f.oid, geometry, fill, generation=f.generation)
    raise ValueError(f"cannot rebuild filter kind {f.kind!r}")


def propagate_update(
    scene: Scene, initial: Shape, modified_index: int, roi: Shape | None = None
) -> Shape:
    """Push a damage shape through the filters in front of a modified object.

    Filters are visited from the back-most one in front of the change toward
    the front; each contributes its update function's image unioned with the
    running shape.  Non-filter objects contribute nothing.
    """
    if not 0 <= modified_index <= len(scene.objects):
        raise IndexError("modified_index out of range")
    u = initial
    for i in range(modified_index - 1, -1, -1):
        obj = scene.objects[i]
        if obj.is_filter:
            u = u | obj.update_fn(u)
    if roi is not None:
        u = u & roi
    return u
