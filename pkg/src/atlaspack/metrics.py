"""Atlas quality measurement: packing efficiency, texture stretch, digests.

Stretch follows the singular-value formulation: for each triangle pair the
affine map from atlas texels to screen pixels has singular values
(Gamma, gamma); values above 1 mean the screen samples the atlas more
densely than it was shaded (undersampling). The scene L2 metric is the
screen-area-weighted RMS of sqrt((Gamma^2 + gamma^2) / 2) and Linf is the
worst Gamma over all triangles.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .packing import AtlasLayout

DIGEST_ALGORITHM = "sha256"


class MetricsError(Exception):
    pass


class DegenerateTriangle(MetricsError):
    """The atlas-space triangle has zero area; the map is undefined."""


class NoValidTriangles(MetricsError):
    """No triangle pair survived validation."""


@dataclass(frozen=True)
class StretchReport:
    l2: float
    linf: float
    per_triangle: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class LayoutDigest:
    """256-bit content hash of the canonical layout serialization."""

    digest: str
    algorithm: str = DIGEST_ALGORITHM


def packing_efficiency(layout: AtlasLayout) -> float:
    """Fraction of the atlas area covered by placements."""
    area = sum(p.w * p.h for p in layout.placements)
    return area / float(layout.omega * layout.omega)


def triangle_stretch(screen_tri, atlas_tri) -> tuple[float, float]:
    """Singular values (max, min) of the atlas-to-screen affine map.

    ``screen_tri`` and ``atlas_tri`` are (3, 2) corner arrays in pixels and
    texels respectively, corresponding vertex by vertex. Raises
    DegenerateTriangle when the atlas triangle has zero area.
    """
    s = np.asarray(screen_tri, dtype=np.float64).reshape(3, 2)
    a = np.asarray(atlas_tri, dtype=np.float64).reshape(3, 2)
    ea = np.column_stack([a[1] - a[0], a[2] - a[0]])
    es = np.column_stack([s[1] - s[0], s[2] - s[0]])
    det = ea[0, 0] * ea[1, 1] - ea[0, 1] * ea[1, 0]
    if det == 0.0:
        raise DegenerateTriangle("atlas triangle has zero area")
    inv = np.array([[ea[1, 1], -ea[0, 1]], [-ea[1, 0], ea[0, 0]]]) / det
    m = es @ inv
    sv = np.linalg.svd(m, compute_uv=False)
    return float(sv[0]), float(sv[1])


def _screen_area(tri: np.ndarray) -> float:
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    return abs(e1[0] * e2[1] - e1[1] * e2[0]) / 2.0


def scene_stretch(pairs: Iterable[tuple], keep_per_triangle: bool = False) -> StretchReport:
    """Aggregate stretch over (screen_tri, atlas_tri) pairs.

    L2 is weighted by screen-space triangle area; Linf is the maximum
    singular value over all pairs. Pairs with a degenerate atlas triangle
    are skipped; raises NoValidTriangles when nothing remains.
    """
    weighted = 0.0
    total_area = 0.0
    linf = 0.0
    per: list[tuple[float, float]] = []
    valid = 0
    for screen_tri, atlas_tri in pairs:
        try:
            big, small = triangle_stretch(screen_tri, atlas_tri)
        except DegenerateTriangle:
            continue
        valid += 1
        area = _screen_area(np.asarray(screen_tri, dtype=np.float64).reshape(3, 2))
        weighted += area * (big * big + small * small) / 2.0
        total_area += area
        linf = max(linf, big)
        if keep_per_triangle:
            per.append((big, small))
    if valid == 0:
        raise NoValidTriangles("no valid triangle pairs")
    l2 = float(np.sqrt(weighted / total_area)) if total_area > 0 else 0.0
    return StretchReport(l2=l2, linf=linf, per_triangle=tuple(per) if keep_per_triangle else None)


def effective_shading_rate(
    layout: AtlasLayout, screen_fragments: int, texels_read: int | None = None
) -> float:
    """Texels consumed per shaded screen fragment.

    When ``texels_read`` is omitted, the texel count defaults to the summed
    placement areas of the layout. Raises MetricsError for a frame with no
    visible fragments, where the ratio is undefined.
    """
    if screen_fragments <= 0:
        raise MetricsError("effective shading rate undefined: no visible fragments")
    if texels_read is None:
        texels_read = sum(p.w * p.h for p in layout.placements)
    return texels_read / float(screen_fragments)


def layout_digest(layout: AtlasLayout) -> LayoutDigest:
    """Hash the canonical serialization of a layout.

    Placements are ordered by chart id and packed little-endian, so equal
    layouts digest equally no matter how their placements were stored or
    on which platform the layout was computed.
    """
    h = hashlib.sha256()
    h.update(
        struct.pack(
            "<QqqQ",
            layout.omega,
            layout.scale.numerator,
            layout.scale.denominator,
            len(layout.placements),
        )
    )
    for p in layout.placements_by_chart_id():
        h.update(
            struct.pack(
                "<qqqqqBqq", p.chart_id, p.x, p.y, p.w, p.h, int(p.rotated), p.target_w, p.target_h
            )
        )
    return LayoutDigest(digest=h.hexdigest())


def layouts_equal(a: AtlasLayout, b: AtlasLayout) -> bool:
    return (
        a.omega == b.omega
        and a.scale == b.scale
        and a.placements_by_chart_id() == b.placements_by_chart_id()
    )
