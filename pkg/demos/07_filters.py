"""The four built-in filters over one little scene."""

from pathlib import Path

import numpy as np

from spanrender import (
    Color, Polygon, Scene, SceneObject, Solid, builtin_affine, builtin_blur,
    builtin_hole, builtin_monochrome, render_region, surface_to_straight_u8,
)
from spanrender.pngio import encode_png

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

WHITE = Color.from_straight(1, 1, 1, 1)
OPAQUE = Solid(WHITE)
below = (
    SceneObject("sq", Polygon(((10, 10), (26, 10), (26, 26), (10, 26))),
                Solid(Color.from_straight(0.9, 0.25, 0.1, 1))),
    SceneObject("tri", Polygon(((18, 14), (34, 20), (22, 34))),
                Solid(Color.from_straight(0.1, 0.4, 0.9, 0.6))),
)
patch = Polygon(((6, 6), (34, 6), (34, 34), (6, 34)))

panels = []
for name, f in [
    ("plain", None),
    ("blur", builtin_blur("f", 5, 5, patch, OPAQUE)),
    ("hole", builtin_hole("f", Polygon(((14, 14), (28, 14), (28, 28), (14, 28))), OPAQUE, target="sq")),
    ("monochrome", builtin_monochrome("f", patch, OPAQUE)),
    ("magnify", builtin_affine("f", (1.5, 0, -10, 0, 1.5, -10), patch, OPAQUE)),
]:
    objs = below if f is None else (f, *below)
    surf, _ = render_region(Scene(objs, WHITE), (0, 0, 39, 39))
    panels.append(surf)
    print(f"{name:11s} centre pixel:", np.round(surf[20, 20], 3))

strip = np.concatenate(panels, axis=1)
(OUT / "07_filters.png").write_bytes(encode_png(surface_to_straight_u8(strip)))
print("wrote", OUT / "07_filters.png", "(plain | blur | hole | monochrome | magnify)")
