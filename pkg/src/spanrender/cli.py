"""Command line entry points: render, replay, serve."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import sceneio
from .coherence import RenderCache
from .pngio import encode_png
from .renderer import RenderStats, render_region
from .sprite import surface_to_straight_u8


def _parse_region(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("region must be x0,y0,x1,y1")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("region coordinates must be integers")


def _load_doc(path: str) -> sceneio.SceneDocument:
    return sceneio.parse_scene(Path(path).read_text(encoding="utf-8"))


def _cache_budget(args) -> int:
    if args.cache_budget is not None:
        return args.cache_budget
    env = os.environ.get("SPANRENDER_CACHE_BUDGET")
    return int(env) if env else 8 << 20


def cmd_render(args) -> int:
    doc = _load_doc(args.scene)
    region = args.region or (0, 0, doc.width - 1, doc.height - 1)
    cache = None if args.no_cache else RenderCache(_cache_budget(args))
    stats = RenderStats()
    scene = doc.to_scene()
    for obj in scene.objects:  # report every object, even fully occluded ones
        stats.note(obj.oid, "rasterized_pixels", 0)
    t0 = time.perf_counter()
    surface, _ = render_region(
        scene,
        region,
        cache=cache,
        stats=stats,
        mode="subpixel" if args.subpixel else "normal",
    )
    stats.wall_ms = (time.perf_counter() - t0) * 1000.0
    Path(args.out).write_bytes(encode_png(surface_to_straight_u8(surface)))
    if args.stats:
        Path(args.stats).write_text(stats.report(), encoding="utf-8")
    return 0


def cmd_replay(args) -> int:
    doc = _load_doc(args.scene)
    script = sceneio.parse_script(Path(args.script).read_text(encoding="utf-8"))
    runner = sceneio.ReplayRunner(
        doc,
        use_cache=not args.no_cache,
        cache_budget=_cache_budget(args),
        mode="subpixel" if args.subpixel else "normal",
    )
    t0 = time.perf_counter()
    result = runner.run(script, verify=args.verify)
    runner.workspace.stats.wall_ms = (time.perf_counter() - t0) * 1000.0
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, frame in result.snapshots.items():
            (out / f"{name}.png").write_bytes(sceneio.frame_to_png(frame))
    if args.stats:
        Path(args.stats).write_text(runner.workspace.stats.report(), encoding="utf-8")
    if args.verify and not result.verified:
        print(
            "verification failed at snapshots: " + ", ".join(result.mismatches),
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    doc = _load_doc(args.scene)
    run_server(
        doc,
        host=args.host,
        port=args.port,
        web_root=args.web_root,
        use_cache=not args.no_cache,
        cache_budget=_cache_budget(args),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spanrender",
        description="Span-based 2D renderer with incremental redraw",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("render", help="render a scene file to PNG")
    pr.add_argument("scene")
    pr.add_argument("out")
    pr.add_argument("--region", type=_parse_region, default=None, metavar="X0,Y0,X1,Y1")
    pr.add_argument("--subpixel", action="store_true", help="subsample boundary pixels")
    pr.add_argument("--stats", default=None, metavar="PATH")
    pr.add_argument("--no-cache", action="store_true")
    pr.add_argument("--cache-budget", type=int, default=None, metavar="BYTES")
    pr.set_defaults(fn=cmd_render)

    pp = sub.add_parser("replay", help="apply an edit script with incremental redraw")
    pp.add_argument("scene")
    pp.add_argument("script")
    pp.add_argument("--out-dir", default=None)
    pp.add_argument("--verify", action="store_true", help="check snapshots against full renders")
    pp.add_argument("--stats", default=None, metavar="PATH")
    pp.add_argument("--no-cache", action="store_true")
    pp.add_argument("--cache-budget", type=int, default=None, metavar="BYTES")
    pp.add_argument("--subpixel", action="store_true")
    pp.set_defaults(fn=cmd_replay)

    ps = sub.add_parser("serve", help="serve render/edit endpoints over HTTP")
    ps.add_argument("scene")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8787)
    ps.add_argument("--web-root", default=None, help="directory of static editor files")
    ps.add_argument("--no-cache", action="store_true")
    ps.add_argument("--cache-budget", type=int, default=None, metavar="BYTES")
    ps.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (sceneio.SceneParseError, sceneio.ScriptError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
