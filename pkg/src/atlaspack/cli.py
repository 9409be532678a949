"""Command-line front end: ingestion, pipeline orchestration, reports.

Subcommands:
  pack-boxes   pack a box list file into an atlas layout
  atlas-scene  run the full per-frame pipeline on an OBJ scene
  compare      run several packers over a scene or box list
  gen-boxes    emit a seeded heavy-tailed synthetic box list

File formats are line-oriented text with '#' comments; layouts round-trip
losslessly and all outputs are written atomically (temp file + rename).
Exit codes: 0 success, 1 malformed input, 2 packing failure, 3 nothing
visible in the scene.
"""

from __future__ import annotations

import argparse
import colorsys
import csv
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .baselines import (
    SUPERBLOCK_FLOOR,
    SuperblockConfig,
    SuperblockLayout,
    sequential_scale_search,
    superblock_pack,
)
from .charts import (
    ChartSet,
    Mesh,
    connected_charts,
    depth_prepass,
    load_obj,
    mark_visible,
    merge_shared_vertices,
)
from .geometry import (
    CameraFrame,
    DegenerateChart,
    NdcBox,
    W_EPSILON,
    chart_bbox,
    viewport_box,
)
from .metrics import (
    DIGEST_ALGORITHM,
    NoValidTriangles,
    StretchReport,
    layout_digest,
    packing_efficiency,
    scene_stretch,
)
from .packing import AtlasLayout, ChartBox, PackFailure, Placement, pack

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_PACK_FAILURE = 2
EXIT_NOTHING_VISIBLE = 3

PACKER_NAMES = ("fastatlas", "sequential", "superblock")


class InputError(Exception):
    """Malformed input file; message names the offending record."""


class NothingVisible(Exception):
    """The camera sees no triangle at all."""


# --- box list files ---------------------------------------------------------


def parse_box_file(path) -> list[ChartBox]:
    """Read (chart_id, min_tri, w, h) records, one per line."""
    boxes: list[ChartBox] = []
    seen_ids: set[int] = set()
    seen_tris: set[int] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InputError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            try:
                chart_id, min_tri, w, h = (int(p) for p in parts)
            except ValueError:
                raise InputError(f"{path}:{lineno}: fields must be unsigned integers") from None
            if min(chart_id, min_tri) < 0:
                raise InputError(f"{path}:{lineno}: ids must be non-negative")
            if w < 1 or h < 1:
                raise InputError(
                    f"{path}:{lineno}: box dimensions must be >= 1 (chart {chart_id}: {w}x{h})"
                )
            if chart_id in seen_ids:
                raise InputError(f"{path}:{lineno}: duplicate chart_id {chart_id}")
            if min_tri in seen_tris:
                raise InputError(f"{path}:{lineno}: duplicate min_tri {min_tri}")
            seen_ids.add(chart_id)
            seen_tris.add(min_tri)
            boxes.append(ChartBox(target_w=w, target_h=h, chart_id=chart_id, min_tri=min_tri))
    return boxes


def write_box_file(boxes: Sequence[ChartBox], path) -> None:
    lines = ["# chart_id min_tri w h"]
    for b in boxes:
        lines.append(f"{b.chart_id} {b.min_tri} {b.target_w} {b.target_h}")
    _write_atomic(path, "\n".join(lines) + "\n")


def generate_boxes(count: int, omega: int, rng: np.random.Generator) -> list[ChartBox]:
    """Seeded heavy-tailed box set: dims in 1..omega, a few large dominate."""
    u = rng.random((count, 2))
    dims = np.clip((omega * u**3).astype(np.int64), 1, omega)
    min_tris = rng.choice(max(count * 8, 8), size=count, replace=False)
    return [
        ChartBox(
            target_w=int(dims[i, 0]),
            target_h=int(dims[i, 1]),
            chart_id=i,
            min_tri=int(min_tris[i]),
        )
        for i in range(count)
    ]


# --- layout files -----------------------------------------------------------


def write_layout_file(layout: AtlasLayout, path) -> None:
    """Canonical text serialization: header keys, then sorted placements."""
    digest = layout_digest(layout)
    lines = [
        "# atlaspack layout v1",
        f"version {__version__}",
        f"omega {layout.omega}",
        f"scale {layout.scale.numerator}/{layout.scale.denominator}",
        f"digest_algorithm {DIGEST_ALGORITHM}",
        f"digest {digest.digest}",
        f"count {len(layout.placements)}",
        "# chart_id x y w h rotated target_w target_h",
    ]
    for p in layout.placements_by_chart_id():
        lines.append(
            f"{p.chart_id} {p.x} {p.y} {p.w} {p.h} {int(p.rotated)} {p.target_w} {p.target_h}"
        )
    _write_atomic(path, "\n".join(lines) + "\n")


def parse_layout_file(path) -> AtlasLayout:
    header: dict[str, str] = {}
    placements: list[Placement] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if not parts[0].isdigit() and len(parts) == 2:
                header[parts[0]] = parts[1]
                continue
            if len(parts) != 8:
                raise InputError(f"{path}:{lineno}: expected 8 placement fields")
            try:
                cid, x, y, w, h, rot, tw, th = (int(p) for p in parts)
            except ValueError:
                raise InputError(f"{path}:{lineno}: placement fields must be integers") from None
            placements.append(
                Placement(
                    chart_id=cid, x=x, y=y, w=w, h=h, rotated=bool(rot), target_w=tw, target_h=th
                )
            )
    for key in ("omega", "scale", "count"):
        if key not in header:
            raise InputError(f"{path}: missing header key '{key}'")
    if len(placements) != int(header["count"]):
        raise InputError(
            f"{path}: count says {header['count']} placements, found {len(placements)}"
        )
    num, _, den = header["scale"].partition("/")
    layout = AtlasLayout(
        omega=int(header["omega"]),
        scale=Fraction(int(num), int(den or "1")),
        placements=tuple(placements),
    )
    if "digest" in header and layout_digest(layout).digest != header["digest"]:
        raise InputError(f"{path}: digest mismatch, file corrupted or edited")
    return layout


# --- scene configuration ----------------------------------------------------


@dataclass
class SceneConfig:
    """Scene description: mesh path, camera, screen, and packing knobs."""

    mesh_path: Path
    fov_y_deg: float = 60.0
    aspect: float | None = None
    near: float = 0.1
    far: float = 1000.0
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    look_at: tuple[float, float, float] = (0.0, 0.0, -1.0)
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    screen: tuple[int, int] = (1920, 1080)
    omega: int = 2048
    n_scales: int = 64
    min_dim: int = 1
    padding: int = 0
    backface_cull: bool = True
    prescale: float = 1.0

    def camera(self) -> CameraFrame:
        aspect = self.aspect if self.aspect is not None else self.screen[0] / self.screen[1]
        return CameraFrame.from_params(
            fov_y=math.radians(self.fov_y_deg),
            aspect=aspect,
            near=self.near,
            far=self.far,
            position=self.position,
            look_at=self.look_at,
            up=self.up,
        )


def parse_scene_config(path) -> SceneConfig:
    """Key-value scene file; unknown keys are rejected with their line."""
    path = Path(path)
    values: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            if not rest:
                raise InputError(f"{path}:{lineno}: key '{key}' has no value")
            if key in values:
                raise InputError(f"{path}:{lineno}: duplicate key '{key}'")
            values[key] = rest

    def take(key, n, conv):
        rest = values.pop(key)
        if len(rest) != n:
            raise InputError(f"{path}: key '{key}' expects {n} values")
        out = tuple(conv(v) for v in rest)
        return out[0] if n == 1 else out

    try:
        if "mesh" not in values:
            raise InputError(f"{path}: missing required key 'mesh'")
        mesh_rel = values.pop("mesh")[0]
        cfg = SceneConfig(mesh_path=(path.parent / mesh_rel).resolve())
        if "fov_y" in values:
            cfg.fov_y_deg = take("fov_y", 1, float)
        if "aspect" in values:
            cfg.aspect = take("aspect", 1, float)
        if "near" in values:
            cfg.near = take("near", 1, float)
        if "far" in values:
            cfg.far = take("far", 1, float)
        if "position" in values:
            cfg.position = take("position", 3, float)
        if "look_at" in values:
            cfg.look_at = take("look_at", 3, float)
        if "up" in values:
            cfg.up = take("up", 3, float)
        if "screen" in values:
            cfg.screen = take("screen", 2, int)
        if "omega" in values:
            cfg.omega = take("omega", 1, int)
        if "scales" in values:
            cfg.n_scales = take("scales", 1, int)
        if "min_dim" in values:
            cfg.min_dim = take("min_dim", 1, int)
        if "padding" in values:
            cfg.padding = take("padding", 1, int)
        if "backface_cull" in values:
            cfg.backface_cull = take("backface_cull", 1, str).lower() in ("1", "true", "yes", "on")
        if "prescale" in values:
            cfg.prescale = take("prescale", 1, float)
    except (ValueError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if values:
        raise InputError(f"{path}: unknown keys: {', '.join(sorted(values))}")
    if cfg.omega & (cfg.omega - 1) or cfg.omega < 1:
        raise InputError(f"{path}: omega must be a power of two")
    if cfg.screen[0] < 1 or cfg.screen[1] < 1:
        raise InputError(f"{path}: screen must be at least 1x1")
    if not cfg.near < cfg.far:
        raise InputError(f"{path}: near must be less than far")
    return cfg


# --- packer registry --------------------------------------------------------


def default_block_size(omega: int) -> int:
    return max(SUPERBLOCK_FLOOR, min(omega, omega // 8))


def make_packer(
    name: str, n_scales: int, min_dim: int, padding: int, block_size: int | None = None
) -> Callable[[Sequence[ChartBox], int], AtlasLayout]:
    if name == "fastatlas":
        return lambda boxes, omega: pack(
            boxes, omega, n_scales=n_scales, min_dim=min_dim, padding=padding
        )
    if name == "sequential":
        return lambda boxes, omega: sequential_scale_search(
            boxes, omega, n_scales=n_scales, min_dim=min_dim, padding=padding
        )
    if name == "superblock":

        def run(boxes, omega):
            cfg = SuperblockConfig(block_size=block_size or default_block_size(omega))
            layout = superblock_pack(boxes, omega, cfg)
            if layout is None:
                raise PackFailure("superblock allocation failed at the halving floor")
            return layout

        return run
    raise InputError(f"unknown packer '{name}' (choose from {', '.join(PACKER_NAMES)})")


# --- scene pipeline ---------------------------------------------------------


@dataclass
class SceneResult:
    config: SceneConfig
    mesh: Mesh
    chart_set: ChartSet
    boxes: list[ChartBox]
    layout: AtlasLayout
    stretch: StretchReport | None
    chart_ndc: dict[int, NdcBox]
    chart_px: dict[int, tuple[int, int]]
    screen_fragments: int
    texels_allocated: int
    n_visible: int


def run_scene_pipeline(cfg: SceneConfig, packer: str = "fastatlas") -> SceneResult:
    """Depth prepass, visibility, chartification, boxes, pack, stretch."""
    mesh = load_obj(cfg.mesh_path)
    cam = cfg.camera()
    depth = depth_prepass(mesh, cam, cfg.screen, backface_cull=cfg.backface_cull)
    vis = mark_visible(mesh, cam, depth, backface_cull=cfg.backface_cull)
    n_visible = int(vis.flags.sum())
    if n_visible == 0:
        raise NothingVisible("no triangle covers a depth-passing sample")
    cs = merge_shared_vertices(connected_charts(mesh, vis), mesh)

    boxes: list[ChartBox] = []
    chart_ndc: dict[int, NdcBox] = {}
    chart_px: dict[int, tuple[int, int]] = {}
    for root, members in cs.charts.items():
        try:
            box = chart_bbox(mesh.triangle_corners(members), cam)
        except DegenerateChart:
            continue
        w_px, h_px = viewport_box(box, cfg.screen[0], cfg.screen[1])
        tw = max(1, math.ceil(cfg.prescale * w_px))
        th = max(1, math.ceil(cfg.prescale * h_px))
        chart_ndc[root] = box
        chart_px[root] = (w_px, h_px)
        boxes.append(ChartBox(target_w=tw, target_h=th, chart_id=root, min_tri=root))

    packer_fn = make_packer(packer, cfg.n_scales, cfg.min_dim, cfg.padding)
    layout = packer_fn(boxes, cfg.omega)

    stretch = _scene_stretch_report(cfg, mesh, cam, cs, layout, chart_ndc, chart_px)
    screen_fragments = int(np.isfinite(depth).sum())
    texels = sum(
        max(0, p.w - 2 * cfg.padding) * max(0, p.h - 2 * cfg.padding) for p in layout.placements
    )
    return SceneResult(
        config=cfg,
        mesh=mesh,
        chart_set=cs,
        boxes=boxes,
        layout=layout,
        stretch=stretch,
        chart_ndc=chart_ndc,
        chart_px=chart_px,
        screen_fragments=screen_fragments,
        texels_allocated=texels,
        n_visible=n_visible,
    )


def _scene_stretch_report(cfg, mesh, cam, cs, layout, chart_ndc, chart_px) -> StretchReport | None:
    """Per-triangle screen-vs-atlas stretch over fully-projectable triangles.

    Triangles with any vertex at or behind the camera plane are skipped;
    their screen vertices have no well-defined projection.
    """
    placements = {p.chart_id: p for p in layout.placements}
    w_screen, h_screen = cfg.screen
    pad = cfg.padding
    pairs = []
    corners = mesh.triangle_corners()
    if len(corners) == 0:
        return None
    homo = np.concatenate([corners, np.ones((len(corners), 3, 1))], axis=2)
    clip = homo @ cam.view_proj.T
    for root, members in cs.charts.items():
        p = placements.get(root)
        if p is None or root not in chart_ndc:
            continue
        box = chart_ndc[root]
        w_px, h_px = chart_px[root]
        cw = p.w - 2 * pad
        ch = p.h - 2 * pad
        for t in members:
            v = clip[t]
            if np.any(v[:, 3] <= W_EPSILON):
                continue
            ndc = v[:, :2] / v[:, 3:4]
            screen_tri = np.column_stack(
                [(ndc[:, 0] + 1.0) * 0.5 * w_screen, (ndc[:, 1] + 1.0) * 0.5 * h_screen]
            )
            u = (ndc[:, 0] - box.min_x) * 0.5 * w_screen
            vv = (ndc[:, 1] - box.min_y) * 0.5 * h_screen
            if p.rotated:
                atlas_tri = np.column_stack(
                    [p.x + pad + vv * (cw / h_px), p.y + pad + u * (ch / w_px)]
                )
            else:
                atlas_tri = np.column_stack(
                    [p.x + pad + u * (cw / w_px), p.y + pad + vv * (ch / h_px)]
                )
            pairs.append((screen_tri, atlas_tri))
    try:
        return scene_stretch(pairs)
    except NoValidTriangles:
        return None


def write_charts_file(cs: ChartSet, path) -> None:
    lines = ["# chart assignments v1", "# t <triangle> <chart>  /  v <vertex> <chart>"]
    for t in np.flatnonzero(cs.chart_of_triangle >= 0):
        lines.append(f"t {t} {cs.chart_of_triangle[t]}")
    for v in sorted(cs.vertex_to_chart):
        lines.append(f"v {v} {cs.vertex_to_chart[v]}")
    _write_atomic(path, "\n".join(lines) + "\n")


# --- SVG rendering ----------------------------------------------------------


def render_svg(layout: AtlasLayout, path) -> None:
    """Vector rendering of the atlas: one rectangle per placement."""
    om = layout.omega
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {om} {om}" '
        f'width="800" height="800">',
        f'<rect x="0" y="0" width="{om}" height="{om}" fill="#181818"/>',
    ]
    stroke = max(om / 800.0, 0.5)
    for p in layout.placements_by_chart_id():
        parts.append(
            f'<rect x="{p.x}" y="{p.y}" width="{p.w}" height="{p.h}" '
            f'fill="{_chart_color(p.chart_id)}" stroke="#000" stroke-width="{stroke:g}"/>'
        )
    parts.append("</svg>")
    _write_atomic(path, "\n".join(parts) + "\n")


def _chart_color(chart_id: int) -> str:
    hue = (chart_id * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.55, 0.92)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


# --- output helpers ---------------------------------------------------------


def _out_path(prefix, suffix: str) -> Path:
    prefix = Path(prefix)
    return prefix.parent / (prefix.name + suffix)


def _write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_atomic(path, buf.getvalue())


def _scale_fields(layout: AtlasLayout):
    return [layout.scale.numerator, layout.scale.denominator, float(layout.scale)]


# --- subcommands ------------------------------------------------------------


def _cmd_pack_boxes(args) -> int:
    try:
        boxes = parse_box_file(args.input)
    except (OSError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    packer_fn = make_packer(args.packer, args.scales, args.min_dim, args.padding, args.block_size)
    try:
        layout = packer_fn(boxes, args.omega)
    except PackFailure as exc:
        print(f"pack failure: {exc}", file=sys.stderr)
        return EXIT_PACK_FAILURE
    prefix = Path(args.out or Path(args.input).with_suffix(""))
    write_layout_file(layout, _out_path(prefix, ".layout.txt"))
    _write_csv(
        _out_path(prefix, ".metrics.csv"),
        ["tool_version", "packer", "omega", "n_boxes", "scale_num", "scale_den", "scale",
         "efficiency", "digest_algorithm", "digest"],
        [[__version__, args.packer, layout.omega, len(layout.placements),
          *_scale_fields(layout), packing_efficiency(layout), DIGEST_ALGORITHM,
          layout_digest(layout).digest]],
    )
    if args.svg:
        render_svg(layout, _out_path(prefix, ".atlas.svg"))
    print(
        f"packed {len(layout.placements)} boxes into {layout.omega}x{layout.omega} "
        f"at scale {layout.scale} (efficiency {packing_efficiency(layout):.4f})"
    )
    return EXIT_OK


def _cmd_atlas_scene(args) -> int:
    try:
        cfg = parse_scene_config(args.scene)
    except (OSError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if args.omega:
        cfg.omega = args.omega
    if args.scales:
        cfg.n_scales = args.scales
    if args.min_dim:
        cfg.min_dim = args.min_dim
    if args.padding is not None:
        cfg.padding = args.padding
    if args.res:
        cfg.screen = args.res
    if args.prescale:
        cfg.prescale = args.prescale
    try:
        result = run_scene_pipeline(cfg, packer=args.packer)
    except (OSError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except PackFailure as exc:
        print(f"pack failure: {exc}", file=sys.stderr)
        return EXIT_PACK_FAILURE
    except NothingVisible as exc:
        print(f"nothing visible: {exc}", file=sys.stderr)
        return EXIT_NOTHING_VISIBLE
    prefix = Path(args.out or Path(args.scene).with_suffix(""))
    layout = result.layout
    write_layout_file(layout, _out_path(prefix, ".layout.txt"))
    write_charts_file(result.chart_set, _out_path(prefix, ".charts.txt"))
    stretch = result.stretch
    _write_csv(
        _out_path(prefix, ".metrics.csv"),
        ["tool_version", "omega", "n_charts", "n_visible_triangles", "scale_num", "scale_den",
         "scale", "efficiency", "l2_stretch", "linf_stretch", "screen_fragments",
         "texels_allocated", "texels_per_fragment", "fragments_per_texel", "digest"],
        [[__version__, layout.omega, result.chart_set.n_charts, result.n_visible,
          *_scale_fields(layout), packing_efficiency(layout),
          stretch.l2 if stretch else "", stretch.linf if stretch else "",
          result.screen_fragments, result.texels_allocated,
          result.texels_allocated / result.screen_fragments,
          result.screen_fragments / result.texels_allocated if result.texels_allocated else "",
          layout_digest(layout).digest]],
    )
    if args.svg:
        render_svg(layout, _out_path(prefix, ".atlas.svg"))
    print(
        f"{result.chart_set.n_charts} charts from {result.n_visible} visible triangles; "
        f"scale {layout.scale}, efficiency {packing_efficiency(layout):.4f}"
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    packers = [p.strip() for p in args.packer.split(",") if p.strip()]
    for p in packers:
        if p not in PACKER_NAMES:
            print(f"error: unknown packer '{p}'", file=sys.stderr)
            return EXIT_BAD_INPUT
    omegas = [int(o) for o in str(args.omega).split(",")]
    is_scene = _looks_like_scene(args.input)
    try:
        boxes = None if is_scene else parse_box_file(args.input)
        cfg = parse_scene_config(args.input) if is_scene else None
    except (OSError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    rows = []
    any_ok = False
    for omega in omegas:
        for name in packers:
            t0 = time.perf_counter()
            try:
                if is_scene:
                    run_cfg = replace(
                        cfg, omega=omega, n_scales=args.scales,
                        min_dim=args.min_dim, padding=args.padding,
                    )
                    result = run_scene_pipeline(run_cfg, packer=name)
                    layout, stretch = result.layout, result.stretch
                    n_boxes = len(result.boxes)
                else:
                    packer_fn = make_packer(
                        name, args.scales, args.min_dim, args.padding, args.block_size
                    )
                    layout = packer_fn(boxes, omega)
                    stretch = _box_stretch_report(layout, args.padding)
                    n_boxes = len(boxes)
            except (PackFailure, NothingVisible) as exc:
                print(f"{name}@{omega}: {exc}", file=sys.stderr)
                rows.append([name, omega, "failed", "", "", "", "", "", "", ""])
                continue
            wall_ms = (time.perf_counter() - t0) * 1000.0
            any_ok = True
            block = layout.block_size if isinstance(layout, SuperblockLayout) else ""
            rows.append(
                [name, omega, "ok", n_boxes, float(layout.scale),
                 packing_efficiency(layout),
                 stretch.l2 if stretch else "", stretch.linf if stretch else "",
                 block, f"{wall_ms:.3f}"]
            )
    _write_csv(
        args.out,
        ["packer", "omega", "status", "n_boxes", "scale", "efficiency", "l2_stretch",
         "linf_stretch", "block_size", "wall_ms"],
        rows,
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK if any_ok else EXIT_PACK_FAILURE


def _box_stretch_report(layout: AtlasLayout, padding: int) -> StretchReport | None:
    """Stretch of box-list packs: target rectangle vs placed content rectangle."""
    pairs = []
    for p in layout.placements:
        cw = p.w - 2 * padding
        ch = p.h - 2 * padding
        if p.rotated:
            cw, ch = ch, cw
        screen = np.array([[0.0, 0.0], [p.target_w, 0.0], [0.0, p.target_h]])
        atlas = np.array([[0.0, 0.0], [cw, 0.0], [0.0, ch]])
        pairs.append((screen, atlas))
    try:
        return scene_stretch(pairs)
    except NoValidTriangles:
        return None


def _looks_like_scene(path) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                return not (len(parts) == 4 and all(p.isdigit() for p in parts))
    except OSError:
        pass
    return False


def _cmd_gen_boxes(args) -> int:
    rng = np.random.default_rng(args.seed)
    boxes = generate_boxes(args.count, args.omega, rng)
    write_box_file(boxes, args.out)
    print(f"wrote {len(boxes)} boxes to {args.out}")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------


def _parse_res(text: str) -> tuple[int, int]:
    try:
        w, _, h = text.lower().partition("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError("resolution must look like 1920x1080") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atlaspack",
        description="Pack per-frame chart boxes into fixed-size texture atlases.",
    )
    parser.add_argument("--version", action="version", version=f"atlaspack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pb = sub.add_parser("pack-boxes", help="pack a box list file")
    pb.add_argument("input", help="box list file: chart_id min_tri w h per line")
    pb.add_argument("--omega", type=int, required=True, help="atlas side (power of two)")
    pb.add_argument("--scales", type=int, default=64, help="number of scale candidates")
    pb.add_argument("--min-dim", type=int, default=1, help="minimum placed dimension")
    pb.add_argument("--padding", type=int, default=0, help="gutter texels per side")
    pb.add_argument("--packer", choices=PACKER_NAMES, default="fastatlas")
    pb.add_argument("--block-size", type=int, default=None, help="superblock size override")
    pb.add_argument("--svg", action="store_true", help="also render the atlas as SVG")
    pb.add_argument("--out", default=None, help="output prefix (default: input stem)")
    pb.set_defaults(func=_cmd_pack_boxes)

    sc = sub.add_parser("atlas-scene", help="run the full pipeline on a scene")
    sc.add_argument("scene", help="scene config file (key value lines)")
    sc.add_argument("--omega", type=int, default=None)
    sc.add_argument("--scales", type=int, default=None)
    sc.add_argument("--min-dim", type=int, default=None)
    sc.add_argument("--padding", type=int, default=None)
    sc.add_argument("--res", type=_parse_res, default=None, metavar="WxH")
    sc.add_argument("--prescale", type=float, default=None, help="shading-rate box prescale")
    sc.add_argument("--packer", choices=PACKER_NAMES, default="fastatlas")
    sc.add_argument("--svg", action="store_true")
    sc.add_argument("--out", default=None)
    sc.set_defaults(func=_cmd_atlas_scene)

    cp = sub.add_parser("compare", help="compare packers on a scene or box list")
    cp.add_argument("input", help="scene config or box list file")
    cp.add_argument("--packer", default=",".join(PACKER_NAMES), help="comma-separated packers")
    cp.add_argument("--omega", required=True, help="comma-separated atlas sides")
    cp.add_argument("--scales", type=int, default=64)
    cp.add_argument("--min-dim", type=int, default=1)
    cp.add_argument("--padding", type=int, default=0)
    cp.add_argument("--block-size", type=int, default=None)
    cp.add_argument("--seed", type=int, default=0, help="seed echoed for reproducibility")
    cp.add_argument("--out", default="compare.csv")
    cp.set_defaults(func=_cmd_compare)

    gb = sub.add_parser("gen-boxes", help="generate a seeded heavy-tailed box list")
    gb.add_argument("--count", type=int, required=True)
    gb.add_argument("--omega", type=int, required=True)
    gb.add_argument("--seed", type=int, default=0)
    gb.add_argument("--out", required=True)
    gb.set_defaults(func=_cmd_gen_boxes)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
