"""Acceptance suite: one test per acceptance criterion, tolerances pinned.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion.
"""

import functools
import math
import random
import time
from pathlib import Path

import numpy as np

from spanrender import cli
from spanrender.antialias import default_tables, perimeter_point
from spanrender.coherence import EditOp, Workspace
from spanrender.filters import (
    builtin_affine,
    builtin_blur,
    builtin_hole,
    builtin_monochrome,
)
from spanrender.geometry import (
    BrushStroke,
    LinearGradient,
    Polygon,
    Solid,
    maxshape,
    minshape,
    shape,
)
from spanrender.pixelset import Shape, from_rect
from spanrender.renderer import RenderStats, Scene, SceneObject, render, render_region
from spanrender.sprite import Color

ROOT = Path(__file__).resolve().parent.parent
TOL = 1.0 / 256.0
WHITE = Color.from_straight(1, 1, 1, 1)


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {name}: FAIL")
                raise
            print(f"\nACCEPTANCE {name}: PASS")

        return wrapper

    return deco


def solid(r, g, b, a=1.0) -> Solid:
    return Solid(Color.from_straight(r, g, b, a))


def oval(cx, cy, rx, ry, n=16):
    return Polygon(
        tuple(
            (cx + rx * math.cos(2 * math.pi * k / n), cy + ry * math.sin(2 * math.pi * k / n))
            for k in range(n)
        )
    )


@criterion("oracle-equivalence (200 random scenes vs painter, <30s)")
def test_oracle_equivalence_200_scenes():
    from spanrender.geometry import rasterize
    from spanrender.sprite import new_surface, write_into

    def painter(scene, rect):
        x0, y0, x1, y1 = rect
        surf = new_surface(x1 - x0 + 1, y1 - y0 + 1, scene.background)
        region = from_rect(*rect)
        for obj in reversed(scene.objects):
            spr = rasterize(obj.geometry, obj.fill, region)
            layer = new_surface(x1 - x0 + 1, y1 - y0 + 1)
            write_into(spr, layer, origin=(x0, y0))
            surf = layer + (1.0 - layer[:, :, 3:4]) * surf
        return surf

    rng = random.Random(20240)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        objs = []
        for i in range(rng.randrange(1, 11)):
            verts = tuple(
                (rng.uniform(-8, 72), rng.uniform(-8, 72))
                for _ in range(rng.randrange(3, 7))
            )
            alpha = rng.choice([0.25, 0.5, 1.0])
            objs.append(
                SceneObject(
                    f"o{i}",
                    Polygon(verts),
                    solid(rng.random(), rng.random(), rng.random(), alpha),
                )
            )
        bg = Color.from_straight(rng.random(), rng.random(), rng.random(), 1.0)
        scene = Scene(tuple(objs), bg)
        got, _ = render_region(scene, (0, 0, 63, 63))
        want = painter(scene, (0, 0, 63, 63))
        worst = max(worst, float(np.max(np.abs(got - want))))
    elapsed = time.perf_counter() - t0
    assert worst <= TOL, f"max channel deviation {worst}"
    assert elapsed < 30.0, f"took {elapsed:.1f}s"


@criterion("span-union reproduction {1-3,7-12} u {0-3,7-12} u {0-4,7-12}")
def test_span_union_reproduction():
    a = Shape([(0, 1, 3), (0, 7, 12)])
    b = Shape([(0, 0, 3), (0, 7, 12)])
    c = Shape([(0, 0, 4), (0, 7, 12)])
    assert a | b | c == Shape([(0, 0, 4), (0, 7, 12)])


@criterion("occlusion skip (opaque front rect, 20 objects behind, 0 pixels)")
def test_occlusion_skip_twenty_objects():
    front = SceneObject(
        "front",
        Polygon(((-4, -4), (68, -4), (68, 68), (-4, 68))),
        solid(0.3, 0.3, 0.35, 1.0),
    )
    behind = tuple(
        SceneObject(
            f"b{i}",
            oval(10 + (i * 17) % 44, 10 + (i * 29) % 44, 8, 6),
            solid(0.8, 0.1, 0.1, 1.0),
        )
        for i in range(20)
    )
    stats = RenderStats()
    render(Scene((front, *behind), WHITE), from_rect(0, 0, 63, 63), stats=stats)
    for i in range(20):
        assert stats.get(f"b{i}", "rasterized_pixels") == 0, f"object b{i} was rasterized"
        assert stats.get(f"b{i}", "compose_ops") == 0


@criterion("correlated mattes (stack == top alone in subpixel mode)")
def test_correlated_mattes():
    tri = Polygon(((8, 4), (28, 10), (12, 28)))
    fill = solid(0.9, 0.1, 0.1, 1.0)
    rect = (0, 0, 31, 31)
    stacked = Scene((SceneObject("a", tri, fill), SceneObject("b", tri, fill)), WHITE)
    alone = Scene((SceneObject("a", tri, fill),), WHITE)

    sub_stack, _ = render_region(stacked, rect, mode="subpixel")
    sub_alone, _ = render_region(alone, rect, mode="subpixel")
    assert float(np.max(np.abs(sub_stack - sub_alone))) <= TOL

    norm_stack, _ = render_region(stacked, rect)
    norm_alone, _ = render_region(alone, rect)
    ring = maxshape(tri, 2.0) & from_rect(*rect)
    diffs = sum(
        1
        for x, y in ring.pixels()
        if float(np.max(np.abs(norm_stack[y, x] - norm_alone[y, x]))) > TOL
    )
    assert diffs > 0, "normal mode must reproduce the double-blend defect"
    inside = from_rect(*rect) - ring
    for x, y in inside.pixels():
        assert float(np.max(np.abs(norm_stack[y, x] - norm_alone[y, x]))) <= TOL


@criterion("antialias accuracy (1000 cases vs 256x quadrature <= 0.01, 4KiB)")
def test_antialias_accuracy():
    filt, etab, stab = default_tables()
    res = 256
    xs = (np.arange(res) + 0.5) / res * 2.0 - 1.0
    X, Y = np.meshgrid(xs, xs)
    W = np.exp(-2.0 * (X**2 + Y**2))
    W /= W.sum()

    def oracle_halfplane(a, b):
        cross = (b[0] - a[0]) * (Y - a[1]) - (b[1] - a[1]) * (X - a[0])
        return float(W[cross > 0].sum())

    def oracle_polygon(verts):
        inside = np.zeros(X.shape, dtype=bool)
        n = len(verts)
        for i in range(n):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % n]
            if y0 == y1:
                continue
            cond = (Y >= min(y0, y1)) & (Y < max(y0, y1))
            xc = x0 + (Y - y0) * (x1 - x0) / (y1 - y0)
            inside ^= cond & (X < xc)
        return float(W[inside].sum())

    rng = random.Random(77)
    worst = 0.0
    for _ in range(1000):  # single-chord lookups
        while True:
            s, t = rng.uniform(0, 64), rng.uniform(0, 64)
            d = abs(s - t) % 64
            if min(d, 64 - d) >= 3.0:
                break
        got = etab.coverage_left(s, t)
        want = oracle_halfplane(perimeter_point(s, 16), perimeter_point(t, 16))
        worst = max(worst, abs(got - want))
    from spanrender.antialias import coverage_multi_edge
    from spanrender.scanline import polygon_edges

    for _ in range(400):  # multi-edge interior-span accumulation
        cx, cy = rng.uniform(-1, 1), rng.uniform(-1, 1)
        nv = rng.randrange(3, 7)
        verts = [
            (
                cx + rng.uniform(0.3, 2.2) * math.cos(2 * math.pi * (k + rng.uniform(0, 0.6)) / nv),
                cy + rng.uniform(0.3, 2.2) * math.sin(2 * math.pi * (k + rng.uniform(0, 0.6)) / nv),
            )
            for k in range(nv)
        ]
        got = coverage_multi_edge(stab, polygon_edges(verts))
        worst = max(worst, abs(got - oracle_polygon(verts)))
    assert worst <= 0.01, f"worst coverage error {worst}"

    centre = etab.coverage(( 0.0, -1.0), (0.0, 1.0), corner_inside=True)
    assert abs(centre - 0.5) <= 0.01
    assert etab.nbytes <= 4096


def _coherence_scene() -> Scene:
    objs_back_to_front = (
        SceneObject(
            "grad",
            Polygon(((2, 42), (62, 42), (62, 62), (2, 62))),
            LinearGradient((2, 42), (62, 62), Color.from_straight(1, 0.3, 0.1, 1), Color.from_straight(0.1, 0.3, 1, 1)),
        ),
        SceneObject("oval", oval(22, 30, 12, 8), solid(0.15, 0.35, 0.8, 1.0)),
        SceneObject("box", Polygon(((40, 6), (56, 6), (56, 22), (40, 22))), solid(0.1, 0.6, 0.3, 1.0)),
        SceneObject("stroke", BrushStroke(((6, 8), (20, 14), (10, 24)), 2.5), solid(0.6, 0.1, 0.6, 0.9)),
        builtin_blur("blurf", 5, 5, Polygon(((30, 36), (60, 36), (60, 58), (30, 58))), solid(1, 1, 1, 1)),
        builtin_hole("holef", Polygon(((44, 2), (62, 2), (62, 14), (44, 14))), solid(1, 1, 1, 0.8), target="box"),
        builtin_affine("zoomf", (2.0, 0.0, -8.0, 0.0, 2.0, -8.0), Polygon(((2, 2), (18, 2), (18, 18), (2, 18))), solid(1, 1, 1, 1)),
        builtin_monochrome("monof", Polygon(((2, 24), (16, 24), (16, 40), (2, 40))), solid(1, 1, 1, 1)),
    )
    return Scene(tuple(reversed(objs_back_to_front)), WHITE)


@criterion("coherence master property (scripted edits patch == scratch)")
def test_coherence_master_property():
    ws = Workspace(_coherence_scene(), 64, 64)
    spot = SceneObject("spot", oval(26, 10, 6, 5), solid(0.95, 0.8, 0.1, 0.6))
    steps = [
        ("int-translate", EditOp("translate", "oval", dx=6, dy=2)),
        ("int-translate-2", EditOp("translate", "oval", dx=-6, dy=-2)),
        ("frac-translate", EditOp("translate", "oval", dx=0.5, dy=0.25)),
        ("rotate-solid-oval", EditOp("rotate", "oval", angle=30, cx=22.5, cy=30.25)),
        ("rotate-gradient", EditOp("rotate", "grad", angle=8, cx=32, cy=52)),
        ("delete", EditOp("delete", "stroke")),
        ("add", EditOp("add", "spot", obj=spot)),
        ("under-blur", EditOp("translate", "box", dx=-2, dy=24)),
        ("under-hole", EditOp("translate", "box", dx=6, dy=-24)),
        ("under-affine", EditOp("translate", "spot", dx=-18, dy=-4)),
        ("under-monochrome", EditOp("translate", "spot", dx=-2, dy=22)),
        ("rotate-solid-2", EditOp("rotate", "oval", angle=-30, cx=22.5, cy=30.25)),
        ("frac-translate-2", EditOp("translate", "grad", dx=0.25, dy=-0.5)),
    ]
    assert len(steps) >= 12
    for name, op in steps:
        if op.kind in ("translate", "rotate"):
            old = ws.scene.get(op.target)
        u = ws.apply_edit(op)
        scratch = ws.render_from_scratch()
        diff = float(np.max(np.abs(ws.frame - scratch)))
        assert diff <= TOL, f"step {name}: patched frame deviates by {diff}"

        if name in ("int-translate", "int-translate-2"):
            assert ws.last_stats.get(op.target, "rasterized_pixels") == 0, name
        if name == "rotate-solid-oval":
            new = ws.scene.get(op.target)
            union_area = (shape(old.geometry, 2.0) | shape(new.geometry, 2.0)).area()
            assert u.area() < union_area, "stable interior must drop out"
            # before filter propagation the damage is exactly a ring
            from spanrender.coherence import update_shape_for_edit

            ring = update_shape_for_edit(op, old, new)
            stable = minshape(old.geometry, 2.0) & minshape(new.geometry, 2.0)
            assert not stable.is_empty()
            assert (ring & stable).is_empty()


@criterion("filter pipeline (blur oracle exact, hole finishes, affine no-op)")
def test_filter_pipeline():
    below = (
        SceneObject("a", Polygon(((6, 6), (30, 10), (18, 34))), solid(0.9, 0.2, 0.1, 1.0)),
        SceneObject("b", Polygon(((20, 18), (44, 22), (30, 44))), solid(0.1, 0.4, 0.9, 0.5)),
    )
    rect = (0, 0, 47, 47)

    blur_geom = Polygon(((10, 10), (38, 10), (38, 38), (10, 38)))
    blurf = builtin_blur("blur", 5, 5, blur_geom, solid(1, 1, 1, 1))
    got, _ = render_region(Scene((blurf, *below), WHITE), rect)
    full, _ = render_region(Scene(below, WHITE), (-10, -10, 57, 57))
    for x, y in (minshape(blur_geom, 2.0) & from_rect(*rect)).pixels():
        acc = np.zeros(4)
        for dy in range(5):
            for dx in range(5):
                acc = acc + full[y + dy - 2 + 10, x + dx - 2 + 10]
        acc *= 1.0 / 25.0
        assert float(np.max(np.abs(got[y, x] - acc))) <= 1e-12

    big = Polygon(((-6, -6), (54, -6), (54, 54), (-6, 54)))
    holef = builtin_hole("hole", big, solid(1, 1, 1, 1), target="all")
    stats = RenderStats()
    sprite, _ = render(Scene((holef, *below), WHITE), from_rect(8, 8, 24, 24), stats=stats)
    assert sprite.shape() == from_rect(8, 8, 24, 24)
    assert all(c.a == 0.0 for _, _, c in sprite.iter_pixels())
    assert stats.get("a", "rasterized_pixels") == 0
    assert stats.get("b", "rasterized_pixels") == 0
    assert stats.get("background", "rasterized_pixels") == 0

    ident = builtin_affine("t", (1, 0, 0, 0, 1, 0), big, solid(1, 1, 1, 1))
    a, _ = render_region(Scene((ident, *below), WHITE), rect)
    b, _ = render_region(Scene(below, WHITE), rect)
    for x, y in (minshape(big, 2.0) & from_rect(*rect)).pixels():
        assert float(np.max(np.abs(a[y, x] - b[y, x]))) <= 1e-12


@criterion("set algebra (1000 random pairs == dense bitmap oracle)")
def test_set_algebra_1000_pairs():
    rng = random.Random(4321)
    size = 128

    def to_bitmap(sh):
        bm = np.zeros((size, size), dtype=bool)
        for y, spans in sh.rows:
            for s, e in spans:
                bm[y, s : e + 1] = True
        return bm

    def from_bitmap(bm):
        triples = []
        for y in range(size):
            row = bm[y]
            x = 0
            while x < size:
                if row[x]:
                    start = x
                    while x < size and row[x]:
                        x += 1
                    triples.append((y, start, x - 1))
                else:
                    x += 1
        return Shape(triples)

    def rand_shape():
        triples = []
        for _ in range(rng.randrange(40)):
            y = rng.randrange(size)
            s = rng.randrange(size)
            e = min(size - 1, s + rng.randrange(1, 24) - 1)
            triples.append((y, s, e))
        return Shape(triples)

    for _ in range(1000):
        a, b = rand_shape(), rand_shape()
        ba, bb = to_bitmap(a), to_bitmap(b)
        ia, ua, da = a & b, a | b, a - b
        assert ia == from_bitmap(ba & bb)
        assert ua == from_bitmap(ba | bb)
        assert da == from_bitmap(ba & ~bb)
        # canonical structural equality
        assert ua == Shape([(y, s, e) for y, spans in ua.rows for s, e in spans])


@criterion("determinism (cli render byte-identical x3, cache changes nothing)")
def test_cli_determinism(tmp_path):
    scene = tmp_path / "demo.txt"
    scene.write_text((ROOT / "scenes" / "demo.txt").read_text())
    outs = []
    for i in range(3):
        out = tmp_path / f"r{i}.png"
        assert cli.main(["render", str(scene), str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    nc = tmp_path / "nc.png"
    assert cli.main(["render", str(scene), str(nc), "--no-cache"]) == 0
    assert nc.read_bytes() == outs[0]
