"""Filter pipeline tests: identity/hole/blur/affine/monochrome + propagation."""

import numpy as np
import pytest

from spanrender.filters import (
    SceneFnResult,
    FilterObject,
    builtin_affine,
    builtin_blur,
    builtin_hole,
    builtin_monochrome,
    identity_filter,
    propagate_update,
)
from spanrender.geometry import Polygon, Solid, minshape, shape, transform_geometry
from spanrender.pixelset import from_rect
from spanrender.renderer import (
    ContractViolation,
    RenderStats,
    Scene,
    SceneObject,
    render,
    render_region,
)
from spanrender.sprite import Color, shape_of

WHITE = Color.from_straight(1, 1, 1, 1)
OPAQUE = Solid(WHITE)
RECT = (0, 0, 47, 47)

BIG = Polygon(((-6, -6), (54, -6), (54, 54), (-6, 54)))  # covers RECT in minshape


def below_scene() -> Scene:
    a = SceneObject(
        "a",
        Polygon(((6, 6), (30, 10), (18, 34))),
        Solid(Color.from_straight(0.9, 0.2, 0.1, 1.0)),
    )
    b = SceneObject(
        "b",
        Polygon(((20, 18), (44, 22), (30, 44))),
        Solid(Color.from_straight(0.1, 0.4, 0.9, 0.5)),
    )
    return Scene((a, b), WHITE)


def test_identity_filter_transparent_to_scene():
    below = below_scene()
    f = identity_filter("f", BIG, OPAQUE)
    region = from_rect(4, 4, 40, 40)
    direct, _ = render(below, region)
    via, _ = render(Scene((f, *below.objects), below.background), region)
    for x, y, c in direct.iter_pixels():
        got = via.pixel(x, y)
        assert got == pytest.approx(tuple(c), abs=1e-12)
    assert shape_of(via) == region


def test_filter_finished_includes_transparent_pixels():
    f = builtin_hole("hole", BIG, OPAQUE, target="all")
    scene = Scene((f, *below_scene().objects), WHITE)
    region = from_rect(8, 8, 24, 24)
    stats = RenderStats()
    sprite, _ = render(scene, region, stats=stats)
    # paint removed, yet pixels are present (finished) with alpha 0
    assert shape_of(sprite) == region
    for _, _, c in sprite.iter_pixels():
        assert c.a == 0.0
    # the loop never touched the objects behind the hole
    assert stats.get("a", "rasterized_pixels") == 0
    assert stats.get("b", "rasterized_pixels") == 0
    assert stats.get("background", "rasterized_pixels") == 0


def test_hole_single_object_shows_the_one_below():
    top = SceneObject(
        "top",
        Polygon(((10, 10), (30, 10), (30, 30), (10, 30))),
        Solid(Color.from_straight(1, 0, 0, 1)),
    )
    bottom = SceneObject(
        "bottom",
        Polygon(((10, 10), (30, 10), (30, 30), (10, 30))),
        Solid(Color.from_straight(0, 1, 0, 1)),
    )
    f = builtin_hole("hole", BIG, OPAQUE, target="top")
    surf, _ = render_region(Scene((f, top, bottom), WHITE), RECT)
    assert surf[20, 20] == pytest.approx([0, 1, 0, 1], abs=1e-9)

    # hole targeting an id that is not below the filter: identity behavior
    f2 = builtin_hole("hole2", BIG, OPAQUE, target="nosuch")
    surf2, _ = render_region(Scene((f2, top, bottom), WHITE), RECT)
    assert surf2[20, 20] == pytest.approx([1, 0, 0, 1], abs=1e-9)


def test_blur_minshape_equals_render_then_convolve():
    below = below_scene()
    geom = Polygon(((10, 10), (38, 10), (38, 38), (10, 38)))
    f = builtin_blur("blur", 5, 5, geom, OPAQUE)
    scene = Scene((f, *below.objects), WHITE)
    got, _ = render_region(scene, RECT)

    full, _ = render_region(below, (-10, -10, 57, 57))  # padded direct render
    kw = kh = 5
    inner = minshape(geom, 2.0) & from_rect(*RECT)
    for x, y in inner.pixels():
        acc = np.zeros(4)
        for dy in range(kh):
            for dx in range(kw):
                acc = acc + full[y + dy - kh // 2 + 10, x + dx - kw // 2 + 10]
        acc *= 1.0 / (kw * kh)
        assert np.max(np.abs(got[y, x] - acc)) <= 1e-12


def test_blur_kernel_one_is_identity_and_constant_invariance():
    below = below_scene()
    geom = Polygon(((10, 10), (38, 10), (38, 38), (10, 38)))
    f1 = builtin_blur("b1", 1, 1, geom, OPAQUE)
    ident = identity_filter("i", geom, OPAQUE)
    a, _ = render_region(Scene((f1, *below.objects), WHITE), RECT)
    b, _ = render_region(Scene((ident, *below.objects), WHITE), RECT)
    assert np.allclose(a, b, atol=1e-12)

    # blurring a constant region leaves it unchanged
    flat = Scene((), Color.from_straight(0.3, 0.5, 0.7, 1.0))
    f5 = builtin_blur("b5", 5, 5, geom, OPAQUE)
    got, _ = render_region(Scene((f5,), flat.background), RECT)
    inner = minshape(geom, 2.0)
    for x, y in (inner & from_rect(*RECT)).pixels():
        assert got[y, x] == pytest.approx([0.3, 0.5, 0.7, 1.0], abs=1e-12)


def test_blur_reading_shape_dilates_request():
    geom = Polygon(((10, 10), (30, 10), (30, 30), (10, 30)))
    f = builtin_blur("b", 5, 3, geom, OPAQUE)
    req = from_rect(12, 12, 20, 20)
    res = f.scene_fn(below_scene(), req)
    assert res.reading_shape == req.dilate_rect(2, 1)
    assert res.render_shape == req
    with pytest.raises(ValueError):
        builtin_blur("bad", 4, 4, geom, OPAQUE)


def test_affine_identity_noop_and_singular_rejected():
    below = below_scene()
    ident = builtin_affine("t", (1, 0, 0, 0, 1, 0), BIG, OPAQUE)
    a, _ = render_region(Scene((ident, *below.objects), WHITE), RECT)
    b, _ = render_region(below, RECT)
    inner = minshape(BIG, 2.0) & from_rect(*RECT)
    for x, y in inner.pixels():
        assert np.max(np.abs(a[y, x] - b[y, x])) <= 1e-12
    with pytest.raises(ValueError):
        builtin_affine("s", (1, 2, 0, 2, 4, 0), BIG, OPAQUE)


def test_affine_magnify_matches_transform_then_render():
    sq = SceneObject(
        "sq",
        Polygon(((20, 20), (28, 20), (28, 28), (20, 28))),
        Solid(Color.from_straight(0.8, 0.1, 0.4, 1.0)),
    )
    m = (2.0, 0.0, -24.0, 0.0, 2.0, -24.0)  # 2x about (24, 24)
    f = builtin_affine("zoom", m, BIG, OPAQUE)
    got, _ = render_region(Scene((f, sq), WHITE), RECT)

    moved = SceneObject("sq2", transform_geometry(sq.geometry, m), sq.fill)
    want, _ = render_region(Scene((moved,), WHITE), RECT)
    inner = minshape(BIG, 2.0) & from_rect(*RECT)
    for x, y in inner.pixels():
        assert np.max(np.abs(got[y, x] - want[y, x])) <= 1e-12


def test_monochrome_gray_fixpoint_and_luma():
    gray = Scene(
        (
            SceneObject(
                "g",
                Polygon(((5, 5), (30, 5), (30, 30), (5, 30))),
                Solid(Color.from_straight(0.6, 0.6, 0.6, 1.0)),
            ),
        ),
        WHITE,
    )
    f = builtin_monochrome("m", BIG, OPAQUE)
    a, _ = render_region(Scene((f, *gray.objects), WHITE), RECT)
    b, _ = render_region(gray, RECT)
    assert np.allclose(a, b, atol=1e-9)

    red = Scene(
        (
            SceneObject(
                "r",
                Polygon(((5, 5), (30, 5), (30, 30), (5, 30))),
                Solid(Color.from_straight(1, 0, 0, 1)),
            ),
        ),
        WHITE,
    )
    c, _ = render_region(Scene((f, *red.objects), WHITE), RECT)
    assert c[20, 20, 0] == pytest.approx(0.2126, abs=1e-6)
    assert c[20, 20, 0] == c[20, 20, 1] == c[20, 20, 2]
    assert c[20, 20, 3] == 1.0


def test_filter_alpha_blending_extremes():
    below = below_scene()
    clear = Solid(Color.from_straight(1, 1, 1, 0.0))
    f = builtin_monochrome("m", BIG, clear)  # filter acts nowhere
    a, _ = render_region(Scene((f, *below.objects), WHITE), RECT)
    b, _ = render_region(below, RECT)
    assert np.allclose(a, b, atol=1e-12)


def test_scene_fn_contract_violation_reported():
    bad = FilterObject(
        oid="bad",
        geometry=BIG,
        fill=OPAQUE,
        kind="custom",
        scene_fn=lambda scene, shp: SceneFnResult(
            scene, shp, shp.dilate_rect(3, 3)
        ),
        filter_fn=lambda s: s,
        update_fn=lambda u: u,
    )
    with pytest.raises(ContractViolation):
        render(Scene((bad,), WHITE), from_rect(0, 0, 10, 10))


def test_propagate_update_paths():
    below = below_scene()
    u0 = from_rect(10, 10, 14, 14)

    plain = Scene((*below.objects,), WHITE)
    assert propagate_update(plain, u0, 1) == u0

    geom = Polygon(((0, 0), (40, 0), (40, 40), (0, 40)))
    blur = builtin_blur("blur", 5, 5, geom, OPAQUE)
    scene = Scene((blur, *below.objects), WHITE)
    got = propagate_update(scene, u0, 2)
    assert got == u0 | (u0.dilate_rect(2, 2) & shape(geom, 2.0))

    roi = from_rect(0, 0, 12, 12)
    assert propagate_update(scene, u0, 2, roi=roi) == (
        (u0 | (u0.dilate_rect(2, 2) & shape(geom, 2.0))) & roi
    )


def test_propagate_update_affine_conservative():
    sq_old = SceneObject(
        "sq",
        Polygon(((18, 18), (26, 18), (26, 26), (18, 26))),
        Solid(Color.from_straight(0.2, 0.7, 0.3, 1.0)),
    )
    sq_new = SceneObject(
        "sq",
        Polygon(((22, 20), (30, 20), (30, 28), (22, 28))),
        Solid(Color.from_straight(0.2, 0.7, 0.3, 1.0)),
    )
    m = (2.0, 0.0, -24.0, 0.0, 2.0, -24.0)
    f = builtin_affine("zoom", m, BIG, OPAQUE)
    old_scene = Scene((f, sq_old), WHITE)
    new_scene = Scene((f, sq_new), WHITE)

    u0 = shape(sq_old.geometry, 2.0) | shape(sq_new.geometry, 2.0)
    u = propagate_update(new_scene, u0, 1, roi=from_rect(*RECT))

    before, _ = render_region(old_scene, RECT)
    after, _ = render_region(new_scene, RECT)
    changed = np.argwhere(np.abs(after - before).max(axis=2) > 1e-12)
    for y, x in changed:
        assert u.contains(int(x), int(y)), (x, y)
