"""Stacked identical antialiased edges: the double-blend defect and its fix."""

from pathlib import Path

import numpy as np

from spanrender import Color, Polygon, Scene, SceneObject, Solid, render_region
from spanrender.sprite import surface_to_straight_u8
from spanrender.pngio import encode_png

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

tri = Polygon(((8, 4), (28, 10), (12, 28)))
fill = Solid(Color.from_straight(0.85, 0.1, 0.1, 1))
stack = Scene((SceneObject("a", tri, fill), SceneObject("b", tri, fill)),
              Color.from_straight(1, 1, 1, 1))
alone = Scene((SceneObject("a", tri, fill),), Color.from_straight(1, 1, 1, 1))

normal_stack, _ = render_region(stack, (0, 0, 31, 31))
normal_alone, _ = render_region(alone, (0, 0, 31, 31))
sub_stack, _ = render_region(stack, (0, 0, 31, 31), mode="subpixel")
sub_alone, _ = render_region(alone, (0, 0, 31, 31), mode="subpixel")

print("normal mode:  max |stack - alone| =", f"{np.abs(normal_stack - normal_alone).max():.4f}",
      " (edges darken: coverages blended as if independent)")
print("subpixel mode: max |stack - alone| =", f"{np.abs(sub_stack - sub_alone).max():.2e}",
      " (per-subsample hidden surfaces: the lower copy never shows)")

side = np.concatenate([normal_stack, sub_stack], axis=1)
(OUT / "06_mattes.png").write_bytes(encode_png(surface_to_straight_u8(side)))
print("wrote", OUT / "06_mattes.png", "(left: normal, right: subpixel)")
