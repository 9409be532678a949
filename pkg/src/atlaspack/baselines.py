"""Reference and comparison packers.

Three packers live here: a sequential row packer that places boxes one at a
time and never overflows (the semantics the prefix-sum fold approximates),
a superblock grid packer in the style of earlier atlasing systems (boxes
are capped to a fixed block size, allocated into power-of-two shelf rows
inside a block grid, with block halving as a fallback), and an exhaustive
optimal packer for tiny instances used as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .packing import (
    AtlasLayout,
    ChartBox,
    FoldResult,
    OrientedBox,
    Placement,
    _check_omega,
    orient,
    order,
    push_up,
)

SUPERBLOCK_FLOOR = 16


@dataclass(frozen=True)
class SuperblockConfig:
    """Block size for grid allocation, plus the halving fallback switch."""

    block_size: int
    halving_enabled: bool = True

    def __post_init__(self):
        if self.block_size < 1 or (self.block_size & (self.block_size - 1)) != 0:
            raise ValueError("block_size must be a power of two")


@dataclass(frozen=True)
class SuperblockLayout(AtlasLayout):
    """Superblock packing result; records the block size actually used."""

    block_size: int = 0


def sequential_fold(widths: Sequence[int], omega: int) -> FoldResult:
    """Row assignment by walking boxes one at a time, never overflowing.

    A box that would cross the atlas edge starts the next row instead, so
    the overflow is zero by construction. Row directions follow the same
    one-left, two-right pattern as the prefix-sum fold.
    """
    _check_omega(omega)
    n = len(widths)
    rows = np.zeros(n, dtype=np.int64)
    xs = np.zeros(n, dtype=np.int64)
    row = 0
    used = 0
    for i, w in enumerate(widths):
        if w < 1 or w > omega:
            raise ValueError("widths must be in [1, omega]")
        if used + w > omega:
            row += 1
            used = 0
        rows[i] = row
        xs[i] = used if row % 3 == 0 else omega - used - w
        used += w
    left = (np.arange(row + 1, dtype=np.int64) % 3) == 0
    return FoldResult(row_of_box=rows, x_of_box=xs, row_direction_left=left, overflow_m=0)


def sequential_pack(ordered_boxes: Sequence[OrientedBox], omega: int) -> AtlasLayout | None:
    """Place ordered boxes sequentially, then push up; None on overflow.

    Boxes are used at their stated dimensions (the caller scales them).
    On instances where the prefix-sum fold has zero overflow this produces
    placements identical to the parallel path.
    """
    if not ordered_boxes:
        return AtlasLayout(omega=omega, scale=Fraction(1), placements=())
    widths = [b.w for b in ordered_boxes]
    fold_result = sequential_fold(widths, omega)
    dims = np.array([[b.w, b.h] for b in ordered_boxes], dtype=np.int64)
    y, height_used = push_up(fold_result, dims, omega)
    if height_used > omega:
        return None
    placements = tuple(
        Placement(
            chart_id=b.source.chart_id,
            x=int(fold_result.x_of_box[i]),
            y=int(y[i]),
            w=b.w,
            h=b.h,
            rotated=b.rotated,
            target_w=b.source.target_w,
            target_h=b.source.target_h,
        )
        for i, b in enumerate(ordered_boxes)
    )
    return AtlasLayout(omega=omega, scale=Fraction(1), placements=placements)


def sequential_scale_search(
    boxes: Sequence[ChartBox],
    omega: int,
    n_scales: int = 64,
    min_dim: int = 1,
    padding: int = 0,
) -> AtlasLayout:
    """Full sequential packer: scale grid search over sequential_pack."""
    from .packing import PackFailure, _scaled_dims

    _check_omega(omega)
    box_list = list(boxes)
    if not box_list:
        return AtlasLayout(omega=omega, scale=Fraction(1), placements=())
    ordered = order(orient(box_list))
    tw = np.array([b.w for b in ordered], dtype=np.int64)
    th = np.array([b.h for b in ordered], dtype=np.int64)
    for i in range(n_scales, 0, -1):
        widths = _scaled_dims(tw, i, n_scales, min_dim, padding)
        heights = _scaled_dims(th, i, n_scales, min_dim, padding)
        if widths.max() > omega:
            continue
        scaled = [
            OrientedBox(w=int(widths[j]), h=int(heights[j]), rotated=b.rotated, source=b.source)
            for j, b in enumerate(ordered)
        ]
        layout = sequential_pack(scaled, omega)
        if layout is not None:
            return AtlasLayout(
                omega=omega, scale=Fraction(i, n_scales), placements=layout.placements
            )
    raise PackFailure("every candidate scale was rejected")


# --- superblock grid packer -------------------------------------------------


class _Shelf:
    __slots__ = ("y", "height", "cursor")

    def __init__(self, y: int, height: int):
        self.y = y
        self.height = height
        self.cursor = 0


class _Block:
    __slots__ = ("ox", "oy", "size", "shelves", "used_h")

    def __init__(self, ox: int, oy: int, size: int):
        self.ox = ox
        self.oy = oy
        self.size = size
        self.shelves: list[_Shelf] = []
        self.used_h = 0

    def place(self, w: int, h: int) -> tuple[int, int] | None:
        shelf_h = _next_pow2(h)
        for shelf in self.shelves:
            if shelf.height == shelf_h and shelf.cursor + w <= self.size:
                x = self.ox + shelf.cursor
                y = self.oy + shelf.y
                shelf.cursor += w
                return x, y
        if self.used_h + shelf_h <= self.size:
            shelf = _Shelf(self.used_h, shelf_h)
            self.used_h += shelf_h
            self.shelves.append(shelf)
            shelf.cursor = w
            return self.ox, self.oy + shelf.y
        return None


def _next_pow2(v: int) -> int:
    return 1 << (v - 1).bit_length() if v > 1 else 1


def superblock_pack(
    boxes: Sequence[ChartBox], omega: int, cfg: SuperblockConfig
) -> SuperblockLayout | None:
    """Allocate boxes into a grid of fixed-size superblocks.

    Boxes larger than the block are uniformly downscaled until they fit
    (the per-box downscale is visible in the placement target vs placed
    dimensions). Inside each block, boxes go first-fit onto shelf rows of
    power-of-two height, scanning blocks in row-major order. If any box
    cannot be placed and halving is enabled, the whole allocation restarts
    at half the block size, down to a 16-texel floor; otherwise None.
    """
    _check_omega(omega)
    if cfg.block_size > omega:
        raise ValueError("block_size must not exceed omega")
    if omega % cfg.block_size != 0:
        raise ValueError("omega must be divisible by block_size")
    box_list = order(orient(list(boxes)))
    block = cfg.block_size
    while True:
        result = _try_superblock(box_list, omega, block)
        if result is not None:
            return SuperblockLayout(
                omega=omega,
                scale=_min_box_scale(result),
                placements=result,
                block_size=block,
            )
        if cfg.halving_enabled and block // 2 >= SUPERBLOCK_FLOOR:
            block //= 2
            continue
        return None


def _try_superblock(
    ordered: Sequence[OrientedBox], omega: int, block: int
) -> tuple[Placement, ...] | None:
    grid = omega // block
    blocks = [_Block(bx * block, by * block, block) for by in range(grid) for bx in range(grid)]
    placements = []
    for b in ordered:
        w, h = b.w, b.h
        if w > block or h > block:
            f = min(Fraction(block, w), Fraction(block, h))
            w = max(1, -((-w * f.numerator) // f.denominator))
            h = max(1, -((-h * f.numerator) // f.denominator))
        spot = None
        for blk in blocks:
            spot = blk.place(w, h)
            if spot is not None:
                break
        if spot is None:
            return None
        placements.append(
            Placement(
                chart_id=b.source.chart_id,
                x=spot[0],
                y=spot[1],
                w=int(w),
                h=int(h),
                rotated=b.rotated,
                target_w=b.source.target_w,
                target_h=b.source.target_h,
            )
        )
    return tuple(placements)


def _min_box_scale(placements: Sequence[Placement]) -> Fraction:
    """Worst per-box downscale, as the layout's reported scale."""
    worst = Fraction(1)
    for p in placements:
        tw = p.target_h if p.rotated else p.target_w
        worst = min(worst, Fraction(p.w, tw))
    return worst


# --- exhaustive optimal (tiny instances) ------------------------------------


def exhaustive_optimal(
    boxes: Sequence[ChartBox],
    omega: int,
    candidate_scales: Sequence[Fraction],
    max_boxes: int = 6,
    max_omega: int = 32,
) -> Fraction | None:
    """Exact best candidate scale for which any placement exists.

    Feasibility is checked by exhaustive backtracking over corner-anchored
    positions with optional 90-degree rotation per box; shrinking every box
    keeps a feasible placement feasible, so candidates are scanned in
    descending order and the first feasible one is exact. Instances are
    limited to ``max_boxes`` boxes and ``max_omega`` atlas size. Returns
    None when no candidate is feasible.
    """
    _check_omega(omega)
    box_list = list(boxes)
    if len(box_list) > max_boxes:
        raise ValueError(f"exhaustive search limited to {max_boxes} boxes")
    if omega > max_omega:
        raise ValueError(f"exhaustive search limited to omega <= {max_omega}")
    if not box_list:
        return max(candidate_scales, default=None)
    targets = [(b.target_w, b.target_h) for b in box_list]
    for s in sorted(set(candidate_scales), reverse=True):
        dims = [
            (max(1, -((-w * s.numerator) // s.denominator)),
             max(1, -((-h * s.numerator) // s.denominator)))
            for w, h in targets
        ]
        if _placement_exists(dims, omega):
            return s
    return None


def _placement_exists(dims: list[tuple[int, int]], omega: int) -> bool:
    if sum(w * h for w, h in dims) > omega * omega:
        return False
    # Largest-area first cuts the search fast on infeasible instances.
    dims = sorted(dims, key=lambda d: (-d[0] * d[1], -max(d), d))
    # Any feasible packing can be slid left/down until every box rests on
    # the atlas edge or another box, so coordinates can be restricted to
    # subset sums of box extents ("normal patterns"); rotation makes both
    # extents of every box eligible contributors.
    sums = {0}
    for w, h in dims:
        sums |= {s + d for s in sums for d in (w, h) if s + d < omega}
    coords = sorted(sums)
    placed: list[tuple[int, int, int, int]] = []

    def overlaps(x: int, y: int, w: int, h: int) -> bool:
        for px, py, pw, ph in placed:
            if x < px + pw and px < x + w and y < py + ph and py < y + h:
                return True
        return False

    def rec(i: int) -> bool:
        if i == len(dims):
            return True
        w0, h0 = dims[i]
        orientations = ((w0, h0),) if w0 == h0 else ((w0, h0), (h0, w0))
        for w, h in orientations:
            for x in coords:
                if x + w > omega:
                    break
                for y in coords:
                    if y + h > omega:
                        break
                    if overlaps(x, y, w, h):
                        continue
                    placed.append((x, y, w, h))
                    if rec(i + 1):
                        return True
                    placed.pop()
        return False

    return rec(0)
