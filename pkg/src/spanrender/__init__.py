"""spanrender: sparse span-based 2D rendering with incremental redraw.

The pipeline renders depth-ordered scenes front to back over sparse pixel
sets, so obscured geometry is never rasterized; boundary pixels get
table-driven antialiasing with an optional per-subsample mode that removes
the stacked-edge blending defect; and scene edits re-render only a computed
damage shape, assisted by a scored sprite/shape cache.
"""

from .antialias import (
    EdgeTable,
    GaussianFootprint,
    SubspanTable,
    build_tables,
    coverage_multi_edge,
    coverage_single_edge,
    default_tables,
    resolve_subpixel,
)
from .coherence import (
    EditOp,
    RenderCache,
    SessionError,
    UnknownObject,
    Workspace,
    translate_fastpath,
    update_shape_for_edit,
)
from .filters import (
    FilterObject,
    SceneFnResult,
    builtin_affine,
    builtin_blur,
    builtin_hole,
    builtin_monochrome,
    identity_filter,
    propagate_update,
    render_filter,
)
from .geometry import (
    BrushStroke,
    Combine,
    LinearGradient,
    Polygon,
    Solid,
    maxshape,
    minshape,
    point_in_geometry,
    rasterize,
    rasterize_subpixel,
    shape,
)
from .pixelset import CoordinateOverflow, Shape, from_rect
from .renderer import (
    ContractViolation,
    FilterDepthExceeded,
    RenderStats,
    Scene,
    SceneObject,
    render,
    render_region,
)
from .sprite import (
    Color,
    Sprite,
    blit,
    compose_under,
    new_surface,
    opaque_shape,
    restrict,
    shape_of,
    surface_to_straight_u8,
    translate_sprite,
)

__version__ = "0.1.0"

__all__ = [
    "BrushStroke",
    "Color",
    "Combine",
    "ContractViolation",
    "CoordinateOverflow",
    "EditOp",
    "EdgeTable",
    "FilterDepthExceeded",
    "FilterObject",
    "GaussianFootprint",
    "LinearGradient",
    "Polygon",
    "RenderCache",
    "RenderStats",
    "Scene",
    "SceneFnResult",
    "SceneObject",
    "SessionError",
    "Shape",
    "Solid",
    "Sprite",
    "SubspanTable",
    "UnknownObject",
    "Workspace",
    "blit",
    "build_tables",
    "builtin_affine",
    "builtin_blur",
    "builtin_hole",
    "builtin_monochrome",
    "compose_under",
    "coverage_multi_edge",
    "coverage_single_edge",
    "default_tables",
    "from_rect",
    "identity_filter",
    "maxshape",
    "minshape",
    "new_surface",
    "opaque_shape",
    "point_in_geometry",
    "propagate_update",
    "rasterize",
    "rasterize_subpixel",
    "render",
    "render_filter",
    "render_region",
    "resolve_subpixel",
    "restrict",
    "shape",
    "shape_of",
    "surface_to_straight_u8",
    "translate_fastpath",
    "translate_sprite",
    "update_shape_for_edit",
]
