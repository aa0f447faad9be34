"""Interactive editing: damage shapes, the translate fast path, cache wins."""

from pathlib import Path

from spanrender import Color, EditOp, Workspace
from spanrender.sceneio import parse_scene

scene_text = (Path(__file__).parent.parent / "scenes" / "demo.txt").read_text()
ws = Workspace(parse_scene(scene_text).to_scene(), 64, 64)
print("initial full render:", ws.last_stats.total("rasterized_pixels"), "pixels rasterized")

# integer drag: the cached sprite just slides
ws.session_begin("oval")
u = ws.session_preview(EditOp("translate", "oval", dx=5, dy=3))
print("integer drag preview: damage", u.area(), "px,",
      ws.last_stats.get("oval", "rasterized_pixels"), "rasterized for the oval (fast path)")
ws.session_commit()

# rotating a solid fill: only the boundary ring needs recomputation
u = ws.apply_edit(EditOp("rotate", "oval", angle=25, cx=29, cy=41))
print("rotate solid oval: damage", u.area(), "px (a ring, the stable centre is skipped)")

# abandoning a drag restores the previous frame from the cache
before = ws.frame.copy()
ws.session_begin("tri")
ws.session_preview(EditOp("translate", "tri", dx=9, dy=5))
ws.session_abandon()
import numpy as np
print("abandon restored the frame byte-for-byte:", bool(np.array_equal(ws.frame, before)))
print("cumulative cache hits:", ws.stats.total("cache_hits"),
      " misses:", ws.stats.total("cache_misses"))
