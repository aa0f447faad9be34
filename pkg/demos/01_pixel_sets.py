"""Sparse pixel sets: spans, set algebra, canonical form."""

from spanrender import Shape, from_rect

a = Shape([(0, 1, 3), (0, 7, 12)])
b = Shape([(0, 0, 3), (0, 7, 12)])
c = Shape([(0, 0, 4), (0, 7, 12)])
print("row spans merge to the minimal set:")
print("   ", (a | b | c).to_text())

r1 = from_rect(0, 0, 9, 9)
r2 = from_rect(5, 5, 14, 14)
print("\nareas: r1", r1.area(), " r2", r2.area())
print("union", (r1 | r2).area(), " intersection", (r1 & r2).area(),
      " difference", (r1 - r2).area())
print("inclusion-exclusion holds:",
      (r1 | r2).area() == r1.area() + r2.area() - (r1 & r2).area())

ring = from_rect(0, 0, 9, 9) - from_rect(2, 2, 7, 7)
print("\na 10x10 frame, one scanline per row:")
print(ring.to_text())
print("\ndilated by 1 pixel it fills back in:",
      ring.dilate_rect(1, 1).area(), "pixels")
