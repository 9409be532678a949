"""Homogeneous projection, single-plane clipping, and conservative NDC boxes.

Conventions: right-handed view space looking down -z, NDC z in [-1, 1].
All clipping here happens in homogeneous clip space, before the perspective
divide; interpolation is linear in (x, y, z, w). A vertex counts as being in
front of the camera iff w > W_EPSILON, which sidesteps division instability
at w == 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

# Vertices with w at or below this are treated as behind the camera plane.
W_EPSILON = 1e-9

SIDE_PLANES = ("left", "right", "bottom", "top")


class GeometryError(Exception):
    pass


class AllClipped(GeometryError):
    """No vertex of the triangle passes the near half-space test."""


class DegenerateChart(GeometryError):
    """No triangle of the chart survives clipping."""


class HPoint(NamedTuple):
    """Homogeneous clip-space coordinates (post-projection, pre-divide)."""

    x: float
    y: float
    z: float
    w: float


@dataclass
class CameraFrame:
    """Perspective camera: view transform plus projection matrix.

    The projection maps a point at distance ``near`` on the view axis to
    NDC z = -1 and at ``far`` to NDC z = +1.
    """

    fov_y: float
    aspect: float
    near: float
    far: float
    view: np.ndarray = field(repr=False)
    proj: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.near > 0 and self.far > self.near):
            raise ValueError("camera requires 0 < near < far")
        self.view = np.asarray(self.view, dtype=np.float64).reshape(4, 4)
        self.proj = np.asarray(self.proj, dtype=np.float64).reshape(4, 4)

    @classmethod
    def from_params(
        cls,
        fov_y: float,
        aspect: float,
        near: float,
        far: float,
        position: Sequence[float] = (0.0, 0.0, 0.0),
        look_at: Sequence[float] = (0.0, 0.0, -1.0),
        up: Sequence[float] = (0.0, 1.0, 0.0),
    ) -> "CameraFrame":
        """Build a camera from lens parameters and a look-at pose.

        ``fov_y`` is the full vertical field of view in radians and
        ``aspect`` is width/height.
        """
        if not (0 < fov_y < math.pi):
            raise ValueError("fov_y must be in (0, pi)")
        if aspect <= 0:
            raise ValueError("aspect must be positive")
        view = look_at_matrix(position, look_at, up)
        proj = perspective_matrix(fov_y, aspect, near, far)
        return cls(fov_y=fov_y, aspect=aspect, near=near, far=far, view=view, proj=proj)

    @property
    def view_proj(self) -> np.ndarray:
        return self.proj @ self.view


def perspective_matrix(fov_y: float, aspect: float, near: float, far: float) -> np.ndarray:
    f = 1.0 / math.tan(fov_y / 2.0)
    m = np.zeros((4, 4), dtype=np.float64)
    m[0, 0] = f / aspect
    m[1, 1] = f
    m[2, 2] = (far + near) / (near - far)
    m[2, 3] = 2.0 * far * near / (near - far)
    m[3, 2] = -1.0
    return m


def look_at_matrix(position, target, up) -> np.ndarray:
    pos = np.asarray(position, dtype=np.float64)
    fwd = np.asarray(target, dtype=np.float64) - pos
    n = np.linalg.norm(fwd)
    if n == 0:
        raise ValueError("look_at target coincides with position")
    fwd = fwd / n
    right = np.cross(fwd, np.asarray(up, dtype=np.float64))
    n = np.linalg.norm(right)
    if n == 0:
        raise ValueError("up vector is parallel to the view direction")
    right = right / n
    true_up = np.cross(right, fwd)
    m = np.eye(4, dtype=np.float64)
    m[0, :3] = right
    m[1, :3] = true_up
    m[2, :3] = -fwd
    m[:3, 3] = m[:3, :3] @ (-pos)
    return m


@dataclass(frozen=True)
class NdcBox:
    """Axis-aligned box in NDC, all coordinates clamped to [-1, 1]."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError("NdcBox requires min <= max componentwise")

    @property
    def area(self) -> float:
        return (self.max_x - self.min_x) * (self.max_y - self.min_y)

    def contains(self, other: "NdcBox", tol: float = 0.0) -> bool:
        return (
            self.min_x <= other.min_x + tol
            and self.min_y <= other.min_y + tol
            and self.max_x >= other.max_x - tol
            and self.max_y >= other.max_y - tol
        )


@dataclass(frozen=True)
class ClipPolygon:
    """Convex polygon produced by clipping a triangle against one plane."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 4 or v.shape[0] not in (3, 4):
            raise ValueError("ClipPolygon holds 3 or 4 homogeneous vertices")
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return self.vertices.shape[0]


def project_vertex(p: Sequence[float], cam: CameraFrame) -> HPoint:
    """Project a world point to homogeneous clip space (no divide)."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise ValueError("expected a finite 3D point")
    h = cam.view_proj @ np.array([p[0], p[1], p[2], 1.0])
    return HPoint(h[0], h[1], h[2], h[3])


def project_points(points: np.ndarray, cam: CameraFrame) -> np.ndarray:
    """Project an (n, 3) array of world points to (n, 4) clip coordinates."""
    pts = np.asarray(points, dtype=np.float64)
    ones = np.ones((pts.shape[0], 1))
    return np.hstack([pts, ones]) @ cam.view_proj.T


def blinn_clamped_ndc(p) -> tuple[float, float]:
    """Clamp a clip-space vertex to the screen square and divide.

    Total over all finite inputs, including w <= 0: coordinates are clamped
    to [-|w|, |w|] before dividing by |w|, and w == 0 maps to the corner
    (sign(x), sign(y)) with sign(0) = +1. The result is always in [-1, 1]^2.
    """
    x, y, _, w = (float(v) for v in p)
    aw = abs(w)
    if aw == 0.0:
        sx = -1.0 if x < 0 else 1.0
        sy = -1.0 if y < 0 else 1.0
        return sx, sy
    cx = min(max(x, -aw), aw) / aw
    cy = min(max(y, -aw), aw) / aw
    return cx, cy


def _clip_poly_halfspace(vertices: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Clip a convex homogeneous polygon against one half-space.

    ``dists`` holds the signed distance of each vertex; points with d > 0
    are kept and crossing edges get a vertex interpolated at d == 0.
    Returns an (m, 4) array, possibly empty.
    """
    n = len(vertices)
    out: list[np.ndarray] = []
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        da, db = dists[i], dists[(i + 1) % n]
        if da > 0:
            out.append(a)
        if (da > 0) != (db > 0):
            t = da / (da - db)
            out.append(a + t * (b - a))
    return np.array(out, dtype=np.float64).reshape(-1, 4)


def clip_near(tri) -> ClipPolygon:
    """Clip a homogeneous triangle against the near half-space w > W_EPSILON.

    Returns the triangle unchanged when all vertices pass; otherwise the 3-
    or 4-vertex intersection polygon with vertices interpolated linearly in
    homogeneous coordinates. Raises AllClipped when no vertex passes.
    """
    v = np.asarray(tri, dtype=np.float64).reshape(3, 4)
    d = v[:, 3] - W_EPSILON
    if np.all(d > 0):
        return ClipPolygon(v)
    if not np.any(d > 0):
        raise AllClipped("triangle lies entirely behind the camera")
    return ClipPolygon(_clip_poly_halfspace(v, d))


def _side_plane_distances(v: np.ndarray, plane: str) -> np.ndarray:
    x, y, w = v[:, 0], v[:, 1], v[:, 3]
    if plane == "left":
        return w + x
    if plane == "right":
        return w - x
    if plane == "bottom":
        return w + y
    return w - y  # top


def _blinn_box_of(vertices: np.ndarray) -> NdcBox:
    pts = [blinn_clamped_ndc(v) for v in vertices]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return NdcBox(min(xs), min(ys), max(xs), max(ys))


def select_side_plane(tri) -> str | None:
    """Pick the frustum side plane whose single clip shrinks the box most.

    Only planes the triangle genuinely crosses (vertices strictly on both
    sides) are candidates; ties resolve in the fixed order left < right <
    bottom < top. Returns None when no side plane is crossed. The triangle
    must not intersect the near half-space boundary.
    """
    v = np.asarray(tri, dtype=np.float64).reshape(3, 4)
    best: tuple[float, int] | None = None
    best_plane: str | None = None
    for idx, plane in enumerate(SIDE_PLANES):
        d = _side_plane_distances(v, plane)
        if not (np.any(d > 0) and np.any(d < 0)):
            continue
        clipped = _clip_poly_halfspace(v, d)
        area = _blinn_box_of(clipped).area
        key = (area, idx)
        if best is None or key < best:
            best = key
            best_plane = plane
    return best_plane


def chart_bbox(triangles, cam: CameraFrame) -> NdcBox:
    """Conservative NDC bounding box of a chart's visible sub-region.

    ``triangles`` is an (n, 3, 3) array of world-space triangles. Each
    triangle crossing the near half-space is clipped against it; triangles
    fully in front are clipped against the one best side plane, if any.
    The clamped divide then runs on every surviving polygon vertex and the
    box is the componentwise min/max. The result contains the exact NDC
    projection of the in-frustum portion of the chart.

    Raises DegenerateChart when no triangle survives clipping.
    """
    tris = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    if tris.shape[0] == 0:
        raise DegenerateChart("chart has no triangles")
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    survived = False
    vp = cam.view_proj.T
    for tri in tris:
        clip = np.hstack([tri, np.ones((3, 1))]) @ vp
        d = clip[:, 3] - W_EPSILON
        if np.all(d > 0):
            plane = select_side_plane(clip)
            if plane is None:
                poly = clip
            else:
                poly = _clip_poly_halfspace(clip, _side_plane_distances(clip, plane))
        elif np.any(d > 0):
            poly = _clip_poly_halfspace(clip, d)
        else:
            continue
        survived = True
        for v in poly:
            cx, cy = blinn_clamped_ndc(v)
            min_x = min(min_x, cx)
            min_y = min(min_y, cy)
            max_x = max(max_x, cx)
            max_y = max(max_y, cy)
    if not survived:
        raise DegenerateChart("no triangle survives clipping")
    return NdcBox(min_x, min_y, max_x, max_y)


def conservative_blinn_box(triangles, cam: CameraFrame) -> NdcBox:
    """Clamp-only reference box: no clipping at all.

    Vertices behind the camera plane (w <= W_EPSILON) may wrap around the
    screen in any direction, so the only clamp-only bound that still covers
    the visible extent is the full square; such vertices expand the box to
    [-1, 1]^2. Used as the no-clip baseline when measuring how much the
    clipping passes tighten chart boxes.
    """
    tris = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    for tri in tris:
        clip = np.hstack([tri, np.ones((3, 1))]) @ cam.view_proj.T
        for v in clip:
            if v[3] <= W_EPSILON:
                return NdcBox(-1.0, -1.0, 1.0, 1.0)
            cx, cy = blinn_clamped_ndc(v)
            min_x = min(min_x, cx)
            min_y = min(min_y, cy)
            max_x = max(max_x, cx)
            max_y = max(max_y, cy)
    if not math.isfinite(min_x):
        raise DegenerateChart("chart has no triangles")
    return NdcBox(min_x, min_y, max_x, max_y)


def viewport_box(box: NdcBox, screen_w: int, screen_h: int) -> tuple[int, int]:
    """Integer pixel extent of an NDC box under the viewport transform.

    Maps [-1, 1]^2 to [0, screen_w] x [0, screen_h] and rounds each extent
    up; a degenerate box still yields at least one pixel per axis.
    """
    if screen_w < 1 or screen_h < 1:
        raise ValueError("screen dimensions must be >= 1")
    w = math.ceil((box.max_x - box.min_x) / 2.0 * screen_w)
    h = math.ceil((box.max_y - box.min_y) / 2.0 * screen_h)
    return max(1, w), max(1, h)
