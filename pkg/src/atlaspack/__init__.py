"""Per-frame chart extraction and deterministic atlas packing on the CPU."""

from .geometry import (
    AllClipped,
    CameraFrame,
    ClipPolygon,
    DegenerateChart,
    HPoint,
    NdcBox,
    blinn_clamped_ndc,
    chart_bbox,
    clip_near,
    conservative_blinn_box,
    project_vertex,
    select_side_plane,
    viewport_box,
)
from .charts import (
    ChartSet,
    Mesh,
    VisibilityBuffer,
    connected_charts,
    depth_prepass,
    load_obj,
    mark_visible,
    merge_shared_vertices,
)
from .packing import (
    AtlasLayout,
    ChartBox,
    FoldResult,
    HeightOverflow,
    OrientedBox,
    PackFailure,
    Placement,
    correct_overflow,
    fold,
    orient,
    order,
    pack,
    pack_at_scale,
    push_up,
)
from .metrics import (
    DegenerateTriangle,
    LayoutDigest,
    NoValidTriangles,
    StretchReport,
    effective_shading_rate,
    layout_digest,
    layouts_equal,
    packing_efficiency,
    scene_stretch,
    triangle_stretch,
)
from .baselines import (
    SuperblockConfig,
    SuperblockLayout,
    exhaustive_optimal,
    sequential_fold,
    sequential_pack,
    sequential_scale_search,
    superblock_pack,
)

__version__ = "0.1.0"

__all__ = [
    "AllClipped",
    "AtlasLayout",
    "CameraFrame",
    "ChartBox",
    "ChartSet",
    "ClipPolygon",
    "DegenerateChart",
    "DegenerateTriangle",
    "FoldResult",
    "HPoint",
    "HeightOverflow",
    "LayoutDigest",
    "Mesh",
    "NdcBox",
    "NoValidTriangles",
    "OrientedBox",
    "PackFailure",
    "Placement",
    "StretchReport",
    "SuperblockConfig",
    "SuperblockLayout",
    "VisibilityBuffer",
    "blinn_clamped_ndc",
    "chart_bbox",
    "clip_near",
    "connected_charts",
    "conservative_blinn_box",
    "correct_overflow",
    "depth_prepass",
    "effective_shading_rate",
    "exhaustive_optimal",
    "fold",
    "layout_digest",
    "layouts_equal",
    "load_obj",
    "mark_visible",
    "merge_shared_vertices",
    "orient",
    "order",
    "pack",
    "pack_at_scale",
    "packing_efficiency",
    "project_vertex",
    "push_up",
    "scene_stretch",
    "select_side_plane",
    "sequential_fold",
    "sequential_pack",
    "sequential_scale_search",
    "superblock_pack",
    "triangle_stretch",
    "viewport_box",
]
