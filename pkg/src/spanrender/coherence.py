"""Frame-to-frame coherence: edit damage, caching, interactive sessions.

When a scene changes, only the pixels whose values can differ need
re-rendering.  For most edits that is the union of the object's old and new
shapes; when the object's rasterization is unchanged by the operation at
fully covered pixels (a solid fill survives rotation, for instance) the
stable interior drops out:

    (shape_old - minshape_new) | (shape_new - minshape_old)

A scored cache keeps shapes and (partial) sprites across frames, and an
interactive session routes the dozens of per-drag generations of the edited
object through a private single-entry cache so only the committed result is
promoted into the main cache.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .filters import propagate_update, rebuild_filter
from .geometry import (
    LinearGradient,
    Solid,
    minshape as g_minshape,
    rotation_about,
    shape as g_shape,
    transform_fill,
    transform_geometry,
    translation,
)
from .pixelset import Shape
from .renderer import RenderStats, Scene, SceneObject, render
from .sprite import Color, Sprite, new_surface, write_into


class SessionError(RuntimeError):
    """Interactive-session protocol violation (begin/preview/commit order)."""


class UnknownObject(KeyError):
    """An edit referenced an object id that is not in the scene."""


# -- edit operations --------------------------------------------------------


@dataclass(frozen=True)
class EditOp:
    kind: str  # translate | rotate | delete | add | modify_fill | modify_geometry
    target: str
    dx: float = 0.0
    dy: float = 0.0
    angle: float = 0.0
    cx: float = 0.0
    cy: float = 0.0
    obj: SceneObject | None = None  # for add
    fill: object | None = None  # for modify_fill
    geometry: object | None = None  # for modify_geometry


def _with_parts(obj: SceneObject, geometry, fill) -> SceneObject:
    # filters close over their geometry, so they must be rebuilt around it
    if obj.is_filter:
        return rebuild_filter(obj, geometry=geometry, fill=fill)
    return replace(obj, geometry=geometry, fill=fill)


def apply_op_to_object(obj: SceneObject, op: EditOp) -> SceneObject:
    if op.kind == "translate":
        m = translation(op.dx, op.dy)
    elif op.kind == "rotate":
        m = rotation_about(op.angle, op.cx, op.cy)
    elif op.kind == "modify_fill":
        return _with_parts(obj, obj.geometry, op.fill)
    elif op.kind == "modify_geometry":
        return _with_parts(obj, op.geometry, obj.fill)
    else:
        raise ValueError(f"cannot apply {op.kind} to an object")
    return _with_parts(
        obj, transform_geometry(obj.geometry, m), transform_fill(obj.fill, m)
    )


def value_invariant(op: EditOp, obj: SceneObject) -> bool:
    """Does the edit leave pixel values unchanged wherever coverage stays 1?

    True for geometry-only edits of solid fills: every fully covered pixel
    keeps the fill color.  Gradients slide with the object, so their interior
    values move too.
    """
    if obj.is_filter:
        return False
    return isinstance(obj.fill, Solid) and op.kind in (
        "translate",
        "rotate",
        "modify_geometry",
    )


def integer_translation(op: EditOp) -> tuple[int, int] | None:
    if op.kind != "translate":
        return None
    rx, ry = round(op.dx), round(op.dy)
    if abs(op.dx - rx) < 1e-9 and abs(op.dy - ry) < 1e-9:
        return (rx, ry)
    return None


def translation_covariant(obj: SceneObject) -> bool:
    """Whole-pixel translations move the rasterization rigidly for these.

    Solid fills trivially; gradients because their endpoints translate with
    the object.  Filters read the scene below, so never.
    """
    if obj.is_filter:
        return False
    return isinstance(obj.fill, (Solid, LinearGradient))


def translate_fastpath(
    cache: "RenderCache", obj: SceneObject, dx: int, dy: int
) -> tuple[tuple[Shape, Shape] | None, Sprite | None] | None:
    """Cached (shape pair, sprite) slid by a whole-pixel move, or None.

    None means the caller must re-rasterize: the object's rasterization is
    position-dependent (filters), or nothing usable is cached.  Either
    element may be None when only the other kind is cached.
    """
    if not translation_covariant(obj):
        return None
    pair = cache.get_shapes(obj)
    spr = cache.get_sprite(obj)
    if pair is None and spr is None:
        return None
    moved_pair = (
        (pair[0].translate(dx, dy), pair[1].translate(dx, dy))
        if pair is not None
        else None
    )
    moved_spr = spr.translate(dx, dy) if spr is not None else None
    return (moved_pair, moved_spr)


def update_shape_for_edit(
    op: EditOp,
    old_obj: SceneObject | None,
    new_obj: SceneObject | None,
    footprint_diameter: float = 2.0,
) -> Shape:
    """Pixels whose final values may differ between the two object states."""
    fd = footprint_diameter
    if op.kind == "delete":
        return g_shape(old_obj.geometry, fd)
    if op.kind == "add":
        return g_shape(new_obj.geometry, fd)
    so = g_shape(old_obj.geometry, fd)
    sn = g_shape(new_obj.geometry, fd)
    if value_invariant(op, old_obj) and isinstance(new_obj.fill, Solid):
        mo = g_minshape(old_obj.geometry, fd)
        mn = g_minshape(new_obj.geometry, fd)
        return (so - mn) | (sn - mo)
    return so | sn


# -- scored cache ------------------------------------------------------------


def _shape_nbytes(s: Shape) -> int:
    return 48 + 24 * s.span_count() + 16 * len(s.rows)


def _sprite_nbytes(s: Sprite) -> int:
    total = 48
    for _, spans in s.rows:
        total += 16
        for st, en, p in spans:
            total += 48 if isinstance(p, Color) else 48 + 32 * (en - st + 1)
    return total


@dataclass
class CacheEntry:
    key: tuple
    kind: str  # shape | sprite
    payload: object
    nbytes: int
    cost: float  # pixels of rasterization work the payload embodies
    last_tick: int


class RenderCache:
    """Byte-budgeted store of shapes and partial sprites, scored eviction.

    Scoring favors recently used, expensive-to-recompute, small entries, and
    shapes over sprites.  Entries for older generations of an object stay
    until the budget pushes them out, which is what makes undo cheap.
    """

    def __init__(
        self,
        budget_bytes: int = 8 << 20,
        *,
        w_recency: float = 4.0,
        w_time: float = 2.0,
        w_size: float = 1.0,
        w_kind: float = 2.0,
    ):
        self.budget = budget_bytes
        self.weights = (w_recency, w_time, w_size, w_kind)
        self.entries: dict[tuple, CacheEntry] = {}
        self.total_bytes = 0
        self._tick = 0

    def _now(self) -> int:
        self._tick += 1
        return self._tick

    def score(self, e: CacheEntry, now: int | None = None) -> float:
        w_r, w_t, w_s, w_k = self.weights
        now = self._tick if now is None else now
        age = max(0, now - e.last_tick)
        return (
            w_r * (1.0 / (1.0 + age))
            + w_t * (e.cost / (e.cost + 4096.0))
            + w_s * (1.0 / max(1, e.nbytes))
            + w_k * (1.0 if e.kind == "shape" else 0.0)
        )

    def get(self, key: tuple):
        e = self.entries.get(key)
        if e is None:
            return None
        e.last_tick = self._now()
        return e.payload

    def put(self, key: tuple, payload, kind: str, nbytes: int, cost: float) -> bool:
        if nbytes > self.budget:
            return False  # single item larger than the whole budget
        old = self.entries.pop(key, None)
        if old is not None:
            self.total_bytes -= old.nbytes
        self.entries[key] = CacheEntry(key, kind, payload, nbytes, cost, self._now())
        self.total_bytes += nbytes
        self.evict()
        return True

    def evict(self) -> None:
        while self.total_bytes > self.budget and self.entries:
            now = self._tick
            worst = min(self.entries.values(), key=lambda e: (self.score(e, now), e.key))
            del self.entries[worst.key]
            self.total_bytes -= worst.nbytes

    def drop(self, key: tuple) -> None:
        e = self.entries.pop(key, None)
        if e is not None:
            self.total_bytes -= e.nbytes

    # typed conveniences used by the renderer

    def get_shapes(self, obj: SceneObject):
        return self.get((obj.oid, obj.generation, "shape"))

    def put_shapes(self, obj: SceneObject, pair) -> None:
        nbytes = _shape_nbytes(pair[0]) + _shape_nbytes(pair[1])
        self.put(
            (obj.oid, obj.generation, "shape"),
            pair,
            "shape",
            nbytes,
            cost=pair[0].area() * 0.01,
        )

    def get_sprite(self, obj: SceneObject):
        return self.get((obj.oid, obj.generation, "sprite"))

    def put_sprite(self, obj: SceneObject, sprite: Sprite, cost: float) -> None:
        key = (obj.oid, obj.generation, "sprite")
        prev = self.entries.get(key)
        total_cost = cost + (prev.cost if prev else 0.0)
        self.put(key, sprite, "sprite", _sprite_nbytes(sprite), total_cost)


class _SessionCacheOverlay:
    """Main cache for everything except the in-flight objects, which live in
    a private single-entry store that each preview overwrites.

    For a target still in its committed state (first preview's fastpath
    source) reads fall through to the main cache; once the object diverges,
    only private entries matching the exact preview state are served.
    """

    def __init__(
        self, main: RenderCache | None, targets: Iterable[str], base: Scene
    ):
        self.main = main
        self.targets = set(targets)
        self.base = {t: base.get(t) for t in targets}
        self.private: dict[tuple[str, str], tuple[SceneObject, object]] = {}

    def _target_get(self, obj: SceneObject, kind: str):
        got = self.private.get((obj.oid, kind))
        if got is not None and got[0] == obj:
            return got[1]
        if self.main is not None and obj == self.base.get(obj.oid):
            if kind == "shape":
                return self.main.get_shapes(obj)
            return self.main.get_sprite(obj)
        return None

    def get_shapes(self, obj: SceneObject):
        if obj.oid in self.targets:
            return self._target_get(obj, "shape")
        return self.main.get_shapes(obj) if self.main else None

    def put_shapes(self, obj: SceneObject, pair) -> None:
        if obj.oid in self.targets:
            self.private[(obj.oid, "shape")] = (obj, pair)
        elif self.main:
            self.main.put_shapes(obj, pair)

    def get_sprite(self, obj: SceneObject):
        if obj.oid in self.targets:
            return self._target_get(obj, "sprite")
        return self.main.get_sprite(obj) if self.main else None

    def put_sprite(self, obj: SceneObject, sprite: Sprite, cost: float) -> None:
        if obj.oid in self.targets:
            self.private[(obj.oid, "sprite")] = (obj, sprite)
        elif self.main:
            self.main.put_sprite(obj, sprite, cost)


# -- workspace: a scene, its frame, and the editing protocol -----------------


@dataclass
class _Session:
    base_scene: Scene
    targets: tuple[str, ...]
    overlay: _SessionCacheOverlay
    touched: set[str] = field(default_factory=set)


class Workspace:
    """Owns a scene, its persistent frame, the cache, and the edit protocol.

    All update computations are intersected with the canvas (the region of
    interest).  `apply_edit` commits immediately; `session_*` implement the
    interactive preview protocol where nothing lands in the scene or the
    main cache until commit.
    """

    def __init__(
        self,
        scene: Scene,
        width: int,
        height: int,
        *,
        use_cache: bool = True,
        cache_budget: int = 8 << 20,
        mode: str = "normal",
    ):
        self.scene = scene
        self.width = width
        self.height = height
        self.roi = Shape.from_rect(0, 0, width - 1, height - 1)
        self.cache = RenderCache(cache_budget) if use_cache else None
        self.mode = mode
        self.frame = new_surface(width, height)
        self.stats = RenderStats()
        self.last_stats = RenderStats()
        self.session: _Session | None = None
        self.full_render()

    # -- rendering ---------------------------------------------------------

    def _render_patch(self, region: Shape, scene: Scene, cache) -> RenderStats:
        stats = RenderStats()
        if not region.is_empty():
            sprite, _ = render(
                scene, region, cache=cache, stats=stats, mode=self.mode
            )
            write_into(sprite, self.frame)
        self.last_stats = stats
        self.stats.merge(stats)
        return stats

    def full_render(self) -> RenderStats:
        return self._render_patch(self.roi, self.scene, self.cache)

    def render_from_scratch(self) -> np.ndarray:
        """Reference frame: fresh render, no cache; does not touch state."""
        stats = RenderStats()
        sprite, _ = render(self.scene, self.roi, cache=None, stats=stats, mode=self.mode)
        surf = new_surface(self.width, self.height)
        write_into(sprite, surf)
        return surf

    # -- committed edits ----------------------------------------------------

    def apply_edit(self, op: EditOp) -> Shape:
        """Apply a committed edit; renders and patches only the damage."""
        if self.session is not None:
            raise SessionError("cannot apply a committed edit during a session")
        scene = self.scene
        if op.kind == "add":
            new_obj = replace(op.obj, generation=0)
            new_scene = Scene((new_obj,) + scene.objects, scene.background)
            u0 = update_shape_for_edit(op, None, new_obj)
            idx = 0
        elif op.kind == "delete":
            old_obj = self._get(scene, op.target)
            idx = scene.index_of(op.target)
            new_scene = scene.without(op.target)
            u0 = update_shape_for_edit(op, old_obj, None)
        else:
            old_obj = self._get(scene, op.target)
            idx = scene.index_of(op.target)
            new_obj = apply_op_to_object(old_obj, op)
            new_obj = replace(new_obj, generation=old_obj.generation + 1)
            new_scene = scene.with_object_replaced(op.target, new_obj)
            u0 = update_shape_for_edit(op, old_obj, new_obj)
            self._maybe_translate_cache(old_obj, new_obj, op)
        u = propagate_update(new_scene, u0, idx, roi=self.roi)
        self.scene = new_scene
        self._render_patch(u, self.scene, self.cache)
        return u

    def _get(self, scene: Scene, oid: str) -> SceneObject:
        try:
            return scene.get(oid)
        except KeyError as e:
            raise UnknownObject(oid) from e

    def _maybe_translate_cache(
        self, old_obj: SceneObject, new_obj: SceneObject, op: EditOp, cache=None
    ) -> bool:
        """Whole-pixel translation: slide cached shape and sprite instead of
        re-rasterizing."""
        cache = cache if cache is not None else self.cache
        d = integer_translation(op)
        if cache is None or d is None:
            return False
        got = translate_fastpath(cache, old_obj, d[0], d[1])
        if got is None:
            return False
        pair, spr = got
        if pair is not None:
            cache.put_shapes(new_obj, pair)
        if spr is not None:
            cache.put_sprite(new_obj, spr, cost=0.0)
        return pair is not None or spr is not None

    # -- interactive sessions -----------------------------------------------

    def session_begin(self, targets: str | Iterable[str]) -> None:
        if self.session is not None:
            raise SessionError("a session is already active")
        if isinstance(targets, str):
            targets = (targets,)
        targets = tuple(targets)
        for t in targets:
            self._get(self.scene, t)
        self.session = _Session(
            base_scene=self.scene,
            targets=targets,
            overlay=_SessionCacheOverlay(self.cache, targets, self.scene),
        )

    def session_preview(self, op: EditOp) -> Shape:
        s = self.session
        if s is None:
            raise SessionError("preview without an active session")
        if op.target not in s.targets:
            raise SessionError(f"object {op.target!r} is not part of the session")
        old_obj = self._get(self.scene, op.target)
        new_obj = apply_op_to_object(old_obj, op)  # generation unchanged
        new_scene = self.scene.with_object_replaced(op.target, new_obj)
        u0 = update_shape_for_edit(op, old_obj, new_obj)
        self._maybe_translate_cache(old_obj, new_obj, op, cache=s.overlay)
        idx = new_scene.index_of(op.target)
        u = propagate_update(new_scene, u0, idx, roi=self.roi)
        self.scene = new_scene
        s.touched.add(op.target)
        self._render_patch(u, self.scene, s.overlay)
        return u

    def session_commit(self) -> None:
        s = self.session
        if s is None:
            raise SessionError("commit without an active session")
        scene = self.scene
        for oid in s.touched:
            obj = scene.get(oid)
            committed = replace(obj, generation=s.base_scene.get(oid).generation + 1)
            scene = scene.with_object_replaced(oid, committed)
            if self.cache is not None:
                got = s.overlay.private.get((oid, "shape"))
                if got is not None and got[0] == obj:
                    self.cache.put_shapes(committed, got[1])
                got = s.overlay.private.get((oid, "sprite"))
                if got is not None and got[0] == obj:
                    self.cache.put_sprite(committed, got[1], cost=0.0)
        self.scene = scene
        self.session = None

    def session_abandon(self) -> Shape:
        s = self.session
        if s is None:
            raise SessionError("abandon without an active session")
        u0 = Shape.empty()
        min_idx = len(s.base_scene.objects)
        for oid in s.touched:
            latest = self.scene.get(oid)
            orig = s.base_scene.get(oid)
            u0 = u0 | g_shape(latest.geometry) | g_shape(orig.geometry)
            min_idx = min(min_idx, s.base_scene.index_of(oid))
        self.scene = s.base_scene
        self.session = None
        if u0.is_empty():
            self.last_stats = RenderStats()
            return u0
        u = propagate_update(self.scene, u0, min_idx, roi=self.roi)
        self._render_patch(u, self.scene, self.cache)
        return u
