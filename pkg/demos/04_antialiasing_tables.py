"""Coverage tables vs dense quadrature; the straight-edge half-coverage check."""

import random

import numpy as np

from spanrender import default_tables
from spanrender.antialias import coverage_multi_edge, perimeter_point
from spanrender.scanline import polygon_edges

filt, edge_table, subspan_table = default_tables()
print("filter: gaussian, footprint diameter", filt.diameter, " grid", filt.n, "x", filt.n)
print("edge table bytes:", edge_table.nbytes)

# a vertical chord through the footprint centre covers half the filter mass
half = edge_table.coverage((0.0, -1.0), (0.0, 1.0), corner_inside=True)
print("straight edge through the centre ->", round(half, 4))

# quadrature oracle
res = 256
xs = (np.arange(res) + 0.5) / res * 2 - 1
X, Y = np.meshgrid(xs, xs)
W = np.exp(-2.0 * (X**2 + Y**2)); W /= W.sum()

rng = random.Random(1)
worst = 0.0
for _ in range(300):
    s, t = rng.uniform(0, 64), rng.uniform(0, 64)
    d = abs(s - t) % 64
    if min(d, 64 - d) < 3:
        continue
    a, b = perimeter_point(s, 16), perimeter_point(t, 16)
    cross = (b[0] - a[0]) * (Y - a[1]) - (b[1] - a[1]) * (X - a[0])
    want = float(W[cross > 0].sum())
    worst = max(worst, abs(edge_table.coverage_left(s, t) - want))
print("worst single-edge lookup error over 300 random chords:", round(worst, 5))

tri = polygon_edges([(-0.8, -0.9), (1.4, 0.1), (-0.3, 1.2)])
print("multi-edge coverage of a triangle over the footprint:",
      round(coverage_multi_edge(subspan_table, tri), 4))
