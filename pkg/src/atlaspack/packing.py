"""Deterministic tight packing of chart boxes into a fixed square atlas.

The packer orients boxes taller-than-wide, orders them (height descending,
owning-triangle index ascending), and for each candidate scale folds the
ordered strip into atlas-width rows with a prefix sum, corrects horizontal
overflow by shrinking the scale, and compacts rows upward against an
advancing frontline. Candidate scales are evaluated independently and the
largest accepted one wins.

All scale arithmetic is exact rational (integer numerators/denominators),
so identical box multisets produce bit-identical layouts regardless of
input order, platform, or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# Structural cap on box dimensions; keeps 64-bit prefix sums safe.
MAX_BOX_DIM = 1 << 23

# Overflow-corrected scales snap down to this grid so the integer ceil
# division below never leaves 64 bits.
_SCALE_GRID_BITS = 24

# Row direction pattern: one left-starting row, then two right-starting.
_DIRECTION_PERIOD = 3

_MAX_OVERFLOW_ITERATIONS = 8


class PackingError(Exception):
    pass


class HeightOverflow(PackingError):
    """A box is taller than the ordering capacity allows."""


class PackFailure(PackingError):
    """Every candidate scale was rejected."""


@dataclass(frozen=True)
class ChartBox:
    """A pack request: integer target dimensions plus identity."""

    target_w: int
    target_h: int
    chart_id: int
    min_tri: int

    def __post_init__(self):
        if self.target_w < 1 or self.target_h < 1:
            raise ValueError(f"box {self.chart_id}: target dims must be >= 1")


@dataclass(frozen=True)
class OrientedBox:
    """A chart box rotated so it is at least as tall as it is wide."""

    w: int
    h: int
    rotated: bool
    source: ChartBox


@dataclass(frozen=True)
class Placement:
    """One placed box: top-left corner and final dimensions in texels."""

    chart_id: int
    x: int
    y: int
    w: int
    h: int
    rotated: bool
    target_w: int
    target_h: int


@dataclass(frozen=True)
class AtlasLayout:
    """A packed atlas: global scale plus one placement per input box."""

    omega: int
    scale: Fraction
    placements: tuple[Placement, ...]

    def placements_by_chart_id(self) -> tuple[Placement, ...]:
        return tuple(sorted(self.placements, key=lambda p: p.chart_id))


@dataclass(frozen=True)
class FoldResult:
    """Row/offset assignment for an ordered strip of box widths."""

    row_of_box: np.ndarray
    x_of_box: np.ndarray
    row_direction_left: np.ndarray  # per row, True when the row starts left
    overflow_m: int


def orient(boxes: Iterable[ChartBox]) -> list[OrientedBox]:
    """Rotate wider-than-tall boxes by 90 degrees; squares stay put."""
    out = []
    for b in boxes:
        if b.target_w > b.target_h:
            out.append(OrientedBox(w=b.target_h, h=b.target_w, rotated=True, source=b))
        else:
            out.append(OrientedBox(w=b.target_w, h=b.target_h, rotated=False, source=b))
    return out


def order(boxes: Sequence[OrientedBox], max_h: int = MAX_BOX_DIM) -> list[OrientedBox]:
    """Sort boxes by height descending, owning-triangle index ascending.

    The key depends only on box content, so any permutation of the same
    multiset yields the identical sequence. Raises HeightOverflow when a
    box exceeds ``max_h``.
    """
    for b in boxes:
        if b.h > max_h:
            raise HeightOverflow(f"box height {b.h} exceeds capacity {max_h}")
    return sorted(boxes, key=lambda b: (-b.h, b.source.min_tri))


def fold(widths, omega: int) -> FoldResult:
    """Fold an ordered strip of widths into atlas rows via a prefix sum.

    With omega = 2^k, the exclusive prefix sum p_i of the widths gives row
    r_i = p_i >> k and in-row offset q_i = p_i & (omega - 1). Left-starting
    rows place at x = q; right-starting rows mirror to x = omega - q - w.
    The overflow m is the largest amount any box sticks out past omega,
    measured from the pre-mirroring offset.
    """
    _check_omega(omega)
    w = np.asarray(widths, dtype=np.int64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("fold requires a non-empty width sequence")
    if np.any(w < 1):
        raise ValueError("widths must be >= 1")
    if np.any(w > omega):
        raise ValueError("fold requires every width <= omega")
    k = omega.bit_length() - 1
    p = np.concatenate([[0], np.cumsum(w[:-1], dtype=np.int64)])
    rows = p >> k
    q = p & (omega - 1)
    n_rows = int(rows[-1]) + 1
    left = (np.arange(n_rows, dtype=np.int64) % _DIRECTION_PERIOD) == 0
    x = np.where(left[rows], q, omega - q - w)
    m = int(max(0, int((q + w - omega).max())))
    return FoldResult(row_of_box=rows, x_of_box=x, row_direction_left=left, overflow_m=m)


def correct_overflow(scale: Fraction, m: int, omega: int) -> Fraction:
    """Shrink the scale so the worst horizontal overflow m fits."""
    if m < 0:
        raise ValueError("overflow must be non-negative")
    if m == 0:
        return scale
    return scale * Fraction(omega, omega + m)


def push_up(fold_result: FoldResult, dims, omega: int) -> tuple[np.ndarray, int]:
    """Compact folded rows upward against an advancing frontline.

    Rows are processed in index order. Within a row every box first reads
    its rest height as the frontline maximum over its column span (against
    the pre-row snapshot), then every box writes back its new top. Returns
    the per-box y offsets and the tallest frontline column.
    """
    _check_omega(omega)
    if fold_result.overflow_m != 0:
        raise ValueError("push_up requires a fold with zero overflow")
    d = np.asarray(dims, dtype=np.int64).reshape(-1, 2)
    widths, heights = d[:, 0], d[:, 1]
    x = fold_result.x_of_box
    rows = fold_result.row_of_box
    n = len(widths)
    if len(x) != n:
        raise ValueError("dims do not match the fold result")
    y = np.zeros(n, dtype=np.int64)
    # Sentinel column keeps reduceat boundaries strictly inside the array.
    front = np.zeros(omega + 1, dtype=np.int64)
    starts = x
    ends = x + widths
    # Boxes arrive grouped by row because prefix sums are nondecreasing.
    row_breaks = np.flatnonzero(np.diff(rows)) + 1
    segments = np.split(np.arange(n), row_breaks)
    for seg in segments:
        s = starts[seg]
        e = ends[seg]
        if s.size > 1 and s[0] > s[-1]:  # right-starting rows come mirrored
            seg = seg[::-1]
            s = s[::-1]
            e = e[::-1]
        bounds = np.empty(2 * s.size, dtype=np.int64)
        bounds[0::2] = s
        bounds[1::2] = e
        rest = np.maximum.reduceat(front, bounds)[0::2]
        tops = rest + heights[seg]
        y[seg] = rest
        widths_seg = e - s
        total = int(widths_seg.sum())
        cols = np.repeat(s, widths_seg) + np.arange(total) - np.repeat(
            np.concatenate([[0], np.cumsum(widths_seg[:-1])]), widths_seg
        )
        front[cols] = np.repeat(tops, widths_seg)
    return y, int(front.max())


def pack_at_scale(
    ordered_boxes: Sequence[OrientedBox],
    scale: Fraction,
    omega: int,
    min_dim: int = 1,
    padding: int = 0,
) -> AtlasLayout | None:
    """Attempt a packing at one candidate scale; None when rejected.

    Box dimensions become max(min_dim, ceil(scale * target)) + 2 * padding
    per axis. Horizontal overflow shrinks the scale (at most eight times)
    before the attempt is rejected; a successful fold is then compacted and
    accepted iff the used height fits in the atlas. The returned layout
    records the final effective scale.
    """
    _check_omega(omega)
    if not (0 < scale <= 1):
        raise ValueError("scale must be in (0, 1]")
    if min_dim < 1 or padding < 0:
        raise ValueError("min_dim must be >= 1 and padding >= 0")
    if not ordered_boxes:
        return AtlasLayout(omega=omega, scale=Fraction(scale), placements=())
    tw = np.array([b.w for b in ordered_boxes], dtype=np.int64)
    th = np.array([b.h for b in ordered_boxes], dtype=np.int64)
    return _pack_arrays(ordered_boxes, tw, th, Fraction(scale), omega, min_dim, padding)


def _pack_arrays(
    ordered_boxes: Sequence[OrientedBox],
    tw: np.ndarray,
    th: np.ndarray,
    scale: Fraction,
    omega: int,
    min_dim: int,
    padding: int,
) -> AtlasLayout | None:
    num, den = scale.numerator, scale.denominator
    fold_result = None
    widths = heights = None
    for _ in range(_MAX_OVERFLOW_ITERATIONS + 1):
        widths = _scaled_dims(tw, num, den, min_dim, padding)
        heights = _scaled_dims(th, num, den, min_dim, padding)
        if widths.max() > omega:
            m = int(widths.max() - omega)
        else:
            fold_result = fold(widths, omega)
            m = fold_result.overflow_m
        if m == 0:
            break
        fold_result = None
        num, den = _snap_scale(num * omega, den * (omega + m))
    if fold_result is None or fold_result.overflow_m != 0:
        return None
    # Pigeonhole: total box area beyond the atlas area cannot push into
    # omega rows, so the vertical rejection is decided already.
    if int(np.sum(widths * heights)) > omega * omega:
        return None
    dims = np.stack([widths, heights], axis=1)
    y, height_used = push_up(fold_result, dims, omega)
    if height_used > omega:
        return None
    placements = tuple(
        Placement(
            chart_id=b.source.chart_id,
            x=int(fold_result.x_of_box[i]),
            y=int(y[i]),
            w=int(widths[i]),
            h=int(heights[i]),
            rotated=b.rotated,
            target_w=b.source.target_w,
            target_h=b.source.target_h,
        )
        for i, b in enumerate(ordered_boxes)
    )
    return AtlasLayout(omega=omega, scale=Fraction(num, den), placements=placements)


def pack(
    boxes: Iterable[ChartBox],
    omega: int,
    n_scales: int = 64,
    min_dim: int = 1,
    padding: int = 0,
    workers: int = 1,
) -> AtlasLayout:
    """Pack boxes at the largest feasible scale from a uniform candidate grid.

    Candidates i/n_scales for i = 1..n_scales are evaluated independently
    (optionally across worker threads); the accepted layout with the largest
    candidate scale is returned. The selection depends only on the
    accept/reject vector, so results are schedule-independent.

    Raises PackFailure when every candidate rejects, including the case of
    a box still wider than the atlas at the smallest candidate scale.
    """
    _check_omega(omega)
    if not (1 <= n_scales <= 1 << 20):
        raise ValueError("n_scales must be in [1, 2^20]")
    box_list = list(boxes)
    if not box_list:
        return AtlasLayout(omega=omega, scale=Fraction(1), placements=())
    seen = set()
    for b in box_list:
        if b.min_tri in seen:
            raise ValueError(f"duplicate min_tri {b.min_tri} in pack request")
        seen.add(b.min_tri)
    ordered = order(orient(box_list))
    tw = np.array([b.w for b in ordered], dtype=np.int64)
    th = np.array([b.h for b in ordered], dtype=np.int64)
    floor_w = _scaled_dims(tw, 1, n_scales, min_dim, padding)
    if int(floor_w.max()) > omega:
        raise PackFailure(
            f"a box is wider than the atlas ({floor_w.max()} > {omega}) even at "
            f"the smallest candidate scale 1/{n_scales}"
        )

    def attempt(i: int) -> AtlasLayout | None:
        return _pack_arrays(ordered, tw, th, Fraction(i, n_scales), omega, min_dim, padding)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(attempt, range(1, n_scales + 1)))
    else:
        results = [attempt(i) for i in range(1, n_scales + 1)]
    for layout in reversed(results):
        if layout is not None:
            return layout
    raise PackFailure("every candidate scale was rejected")


def _scaled_dims(targets: np.ndarray, num: int, den: int, min_dim: int, padding: int) -> np.ndarray:
    scaled = -((-num * targets) // den)  # exact ceil(num * t / den)
    return np.maximum(scaled, min_dim) + 2 * padding


def _snap_scale(num: int, den: int) -> tuple[int, int]:
    """Round a corrected scale down onto a fixed dyadic grid.

    Keeps numerators bounded so the vectorized int64 ceil division in
    _scaled_dims cannot overflow, at the cost of shrinking the corrected
    scale by less than 2^-24.
    """
    grid = 1 << _SCALE_GRID_BITS
    snapped = Fraction((num * grid) // den, grid)
    return snapped.numerator, snapped.denominator


def _check_omega(omega: int) -> None:
    if omega < 1 or (omega & (omega - 1)) != 0:
        raise ValueError("omega must be a power of two >= 1")
