"""Trimaps, boundary tracing and frame-to-frame trimap propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import ndimage

from .imaging import as_array, load_gray, save_gray

PATCH_HALF_WIDTH = 3
DEFAULT_MAX_VERTICES = 256


class Label(IntEnum):
    BACKGROUND = 0
    UNKNOWN = 1
    FOREGROUND = 2


@dataclass(frozen=True)
class Trimap:
    """Per-pixel Background / Unknown / Foreground labels (see :class:`Label`)."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2 or lab.shape[0] < 1 or lab.shape[1] < 1:
            raise ValueError(f"trimap labels must be a non-empty 2-D array, got {lab.shape}")
        lab = lab.astype(np.uint8)
        if lab.max() > Label.FOREGROUND:
            raise ValueError("trimap labels must be 0 (B), 1 (U) or 2 (F)")
        if not (lab == Label.FOREGROUND).any():
            raise ValueError("trimap has no Foreground pixel")
        if not (lab == Label.BACKGROUND).any():
            raise ValueError("trimap has no Background pixel")
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)

    @property
    def shape(self):
        return self.labels.shape

    @property
    def foreground(self) -> np.ndarray:
        return self.labels == Label.FOREGROUND

    @property
    def background(self) -> np.ndarray:
        return self.labels == Label.BACKGROUND

    @property
    def unknown(self) -> np.ndarray:
        return self.labels == Label.UNKNOWN

    @property
    def region(self) -> np.ndarray:
        """Foreground-or-Unknown mask: the area being cloned."""
        return self.labels != Label.BACKGROUND

    @classmethod
    def from_bytes(cls, values) -> "Trimap":
        """Decode the file encoding: 0 -> B, 255 -> F, anything else -> U."""
        b = np.asarray(values, dtype=np.uint8)
        lab = np.full(b.shape, Label.UNKNOWN, dtype=np.uint8)
        lab[b == 0] = Label.BACKGROUND
        lab[b == 255] = Label.FOREGROUND
        return cls(lab)

    def to_bytes(self) -> np.ndarray:
        out = np.full(self.shape, 128, dtype=np.uint8)
        out[self.background] = 0
        out[self.foreground] = 255
        return out


@dataclass(frozen=True)
class BoundaryList:
    """Ordered (x, y) pixel coordinates along a region contour."""

    vertices: np.ndarray
    closed: bool = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.int64).reshape(-1, 2)
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class TrimapFlow:
    """Per-vertex integer displacements found by block matching.

    ``shift`` is the rigid translation applied to the whole trimap: the
    component-wise lower median of the per-vertex displacements.
    """

    displacement: np.ndarray
    window_radius: int

    @property
    def shift(self) -> tuple:
        d = np.asarray(self.displacement)
        if len(d) == 0:
            return (0, 0)
        k = (len(d) - 1) // 2
        return (int(np.sort(d[:, 0])[k]), int(np.sort(d[:, 1])[k]))


def load_trimap(path, shape=None) -> Trimap:
    """Read a grayscale trimap file; ``shape`` is the (H, W) of the paired frame."""
    raw = load_gray(path)
    if shape is not None and tuple(raw.shape) != tuple(shape[:2]):
        raise ValueError(
            f"trimap {path} is {raw.shape[1]}x{raw.shape[0]}, frame is {shape[1]}x{shape[0]}"
        )
    return Trimap.from_bytes(raw)


def save_trimap(t: Trimap, path) -> None:
    save_gray(t.to_bytes(), path)


# Neighbour offsets (dx, dy) in clockwise screen order, starting west.
_MOORE = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)]
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def _moore_trace(mask: np.ndarray, start: tuple) -> list:
    """Moore-neighbour trace of the outer contour of ``mask`` from ``start``.

    ``mask`` must be padded so that no region pixel touches the array edge.
    """
    sx, sy = start
    # start is the first region pixel in raster order, so its west neighbour is empty
    back = (sx - 1, sy)
    cur = start
    path = [start]
    first_move = None
    while True:
        bdir = _MOORE_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        nxt = None
        prev = back
        for k in range(1, 9):
            dx, dy = _MOORE[(bdir + k) % 8]
            cand = (cur[0] + dx, cur[1] + dy)
            if mask[cand[1], cand[0]]:
                nxt = cand
                break
            prev = cand
        if nxt is None:
            return path  # isolated pixel
        if first_move is None:
            first_move = nxt
        elif cur == start and nxt == first_move:
            return path[:-1]
        path.append(nxt)
        back, cur = prev, nxt


def extract_boundary(t: Trimap):
    """Trace the outer contour of the Foreground-or-Unknown region.

    Returns
    -------
    delta : BoundaryList
        Contour pixels in Moore-tracing order from the topmost-then-leftmost
        region pixel. The traversal has positive signed (shoelace) area in
        (x, y) pixel coordinates, i.e. it is counter-clockwise in that frame.
        Pixels revisited by the trace (one-pixel-wide necks) appear once.
    b_in : ndarray of shape (n, 2)
        All region pixels that are not on the contour, as (x, y), raster order.
    """
    region = t.region
    if not region.any():
        raise ValueError("trimap has an empty Foreground/Unknown region")
    _, ncomp = ndimage.label(region, structure=np.ones((3, 3), dtype=bool))
    if ncomp != 1:
        raise ValueError(f"Foreground/Unknown region has {ncomp} 8-connected components, expected 1")
    padded = np.pad(region, 1)
    ys, xs = np.nonzero(padded)
    start = (int(xs[0]), int(ys[0]))
    seen = set()
    verts = []
    for p in _moore_trace(padded, start):
        if p not in seen:
            seen.add(p)
            verts.append((p[0] - 1, p[1] - 1))
    delta = BoundaryList(np.array(verts, dtype=np.int64), closed=True)
    on_delta = np.zeros(region.shape, dtype=bool)
    on_delta[delta.vertices[:, 1], delta.vertices[:, 0]] = True
    iy, ix = np.nonzero(region & ~on_delta)
    b_in = np.stack([ix, iy], axis=1).astype(np.int64)
    return delta, b_in


def hierarchical_boundary_sample(delta: BoundaryList, max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundaryList:
    """Keep every ceil(n / max_vertices)-th contour vertex, starting at index 0."""
    n = len(delta)
    if n == 0:
        raise ValueError("cannot sample an empty boundary")
    if max_vertices < 4 and n > 4:
        raise ValueError("max_vertices must be at least 4")
    if n <= max_vertices:
        return delta
    step = math.ceil(n / max_vertices)
    return BoundaryList(delta.vertices[::step], closed=delta.closed)


def _shift_order(radius: int) -> np.ndarray:
    """Candidate shifts ordered by (squared length, dy, dx); ties go to the first."""
    r = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(r, r, indexing="ij")
    shifts = np.stack([dx.ravel(), dy.ravel()], axis=1)
    key = np.lexsort((shifts[:, 0], shifts[:, 1], (shifts ** 2).sum(axis=1)))
    return shifts[key]


def block_match(prev_f, curr_f, points: np.ndarray, window_radius: int,
                half_width: int = PATCH_HALF_WIDTH):
    """Integer displacement of each point minimizing patch SAD between frames.

    Returns ``(displacements, valid)`` where ``valid`` marks points whose
    patch stays on the canvas for every candidate shift; invalid rows are 0.
    """
    prev = as_array(prev_f)
    curr = as_array(curr_f)
    h, w = prev.shape[:2]
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    reach = window_radius + half_width
    valid = (
        (pts[:, 0] - reach >= 0) & (pts[:, 0] + reach < w)
        & (pts[:, 1] - reach >= 0) & (pts[:, 1] + reach < h)
    )
    out = np.zeros_like(pts)
    vp = pts[valid]
    if len(vp) == 0:
        return out, valid
    o = np.arange(-half_width, half_width + 1)
    oy, ox = np.meshgrid(o, o, indexing="ij")
    # gather through flat indices: one 1-D take per candidate shift
    lin = (vp[:, 1, None] + oy.ravel()[None, :]) * w + vp[:, 0, None] + ox.ravel()[None, :]
    flat_curr = curr.reshape(-1, 3)
    ref = prev.reshape(-1, 3)[lin]  # (n, patch, 3)
    best = np.full(len(vp), np.inf)
    best_shift = np.zeros((len(vp), 2), dtype=np.int64)
    for dx, dy in _shift_order(window_radius):
        sad = np.abs(np.take(flat_curr, lin + (dy * w + dx), axis=0) - ref).sum(axis=(1, 2))
        better = sad < best
        best[better] = sad[better]
        best_shift[better] = (dx, dy)
    out[valid] = best_shift
    return out, valid


def translate_trimap(t: Trimap, shift) -> Trimap:
    """Translate labels by integer (dx, dy); vacated pixels become Background."""
    dx, dy = int(shift[0]), int(shift[1])
    h, w = t.shape
    out = np.full((h, w), Label.BACKGROUND, dtype=np.uint8)
    src_x = slice(max(0, -dx), min(w, w - dx))
    src_y = slice(max(0, -dy), min(h, h - dy))
    dst_x = slice(max(0, dx), min(w, w + dx))
    dst_y = slice(max(0, dy), min(h, h + dy))
    if src_x.start < src_x.stop and src_y.start < src_y.stop:
        out[dst_y, dst_x] = t.labels[src_y, src_x]
    return Trimap(out)


def propagate_trimap(prev_t: Trimap, prev_f, curr_f, window_radius: int = 5):
    """Carry a trimap from the previous frame to the current one.

    Each contour vertex of ``prev_t`` is block-matched (7x7 SAD) within
    +/- ``window_radius``; the trimap is then translated rigidly by the
    median displacement.

    Returns
    -------
    (Trimap, TrimapFlow)
    """
    if window_radius < 0:
        raise ValueError("window_radius must be non-negative")
    prev = as_array(prev_f)
    curr = as_array(curr_f)
    if prev.shape != curr.shape or prev.shape[:2] != prev_t.shape:
        raise ValueError("frames and trimap must share dimensions")
    delta, _ = extract_boundary(prev_t)
    disp, valid = block_match(prev, curr, delta.vertices, window_radius)
    if not valid.any():
        raise ValueError(
            f"window_radius {window_radius} pushes every boundary patch off the canvas"
        )
    flow = TrimapFlow(disp[valid], window_radius)
    return translate_trimap(prev_t, flow.shift), flow
