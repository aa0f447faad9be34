"""shape / minshape / maxshape of primitives, and CSG combinations."""

from pathlib import Path

import numpy as np

from spanrender import (
    BrushStroke, Color, Combine, Polygon, maxshape, minshape, shape,
    surface_to_straight_u8, new_surface,
)
from spanrender.pngio import encode_png

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

square = Polygon(((10, 10), (20, 10), (20, 20), (10, 20)))
print("axis-aligned square, footprint diameter 2:")
print("  shape bounds   ", shape(square).bounds())
print("  minshape bounds", minshape(square).bounds())
print("  boundary ring  ", maxshape(square).area(), "pixels")

stroke = BrushStroke(((28, 8), (44, 16), (34, 28)), radius=4)
holed = Combine("difference", Polygon(((4, 28), (30, 28), (30, 52), (4, 52))), stroke)
print("\nbrush-stroke hole in a rectangle:")
print("  difference shape equals the left operand's:",
      shape(holed) == shape(Polygon(((4, 28), (30, 28), (30, 52), (4, 52)))))

# paint the three sets into an image: shape gray, minshape dark, ring red
surf = new_surface(60, 60, Color.from_straight(1, 1, 1, 1))
for g, colors in ((square, None), (stroke, None), (holed, None)):
    for pxset, c in ((shape(g), (0.85, 0.85, 0.85)),
                 (maxshape(g), (0.9, 0.3, 0.2)),
                 (minshape(g), (0.25, 0.3, 0.6))):
        for x, y in pxset.pixels():
            if 0 <= x < 60 and 0 <= y < 60:
                surf[y, x] = [*c, 1.0]
(OUT / "03_shapes.png").write_bytes(encode_png(surface_to_straight_u8(surf)))
print("wrote", OUT / "03_shapes.png")
