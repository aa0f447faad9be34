"""Front-to-back rendering skips obscured work; stats prove it."""

from spanrender import (
    Color, Polygon, RenderStats, Scene, SceneObject, Solid, from_rect, render,
)

WHITE = Color.from_straight(1, 1, 1, 1)

# an opaque card in front of a stack of expensive shapes
front = SceneObject("card", Polygon(((4, 4), (59, 4), (59, 59), (4, 59))),
                    Solid(Color.from_straight(0.2, 0.25, 0.3, 1)))
behind = [
    SceneObject(f"shape{i}", Polygon(((8 + i, 8), (56, 10 + i), (20, 56 - i))),
                Solid(Color.from_straight(0.9, 0.2, 0.1, 1)))
    for i in range(8)
]

stats = RenderStats()
sprite, _ = render(Scene((front, *behind), WHITE), from_rect(0, 0, 63, 63), stats=stats)
print("pixels rasterized per object (front to back):")
for oid in ["card"] + [f"shape{i}" for i in range(8)] + ["background"]:
    print(f"  {oid:10s} {stats.get(oid, 'rasterized_pixels'):6d}")
print("\nonly the card's boundary ring lets anything through;")
print("everything fully behind its opaque interior cost zero work.")
