"""Sprites: premultiplied spans, compose-under, finished pixels."""

from pathlib import Path

import numpy as np

from spanrender import (
    Color, Sprite, blit, compose_under, from_rect, new_surface,
    surface_to_straight_u8,
)
from spanrender.pngio import encode_png

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

red = Sprite.solid(from_rect(2, 2, 17, 12), Color.from_straight(1, 0, 0, 0.6))
blue = Sprite.solid(from_rect(10, 6, 27, 18), Color.from_straight(0, 0, 1, 1))

# front-to-back: compose blue UNDER the translucent red
composite, finished = compose_under(red, blue)
print("composite pixels:", composite.pixel_count())
print("finished (opaque) pixels:", finished.area(),
      "= blue's area where the stack became opaque")
print("overlap pixel:", composite.pixel(12, 8))

# runs survive composition: the overlap span is still a single run
row = dict(composite.rows)[8]
print("row 8 spans:", [(s, e, type(p).__name__) for s, e, p in row])

surf = new_surface(30, 20)
blit(composite, surf, Color.from_straight(1, 1, 1, 1))
(OUT / "02_compose.png").write_bytes(encode_png(surface_to_straight_u8(surf)))
print("wrote", OUT / "02_compose.png")
