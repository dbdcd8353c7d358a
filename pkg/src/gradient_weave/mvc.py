"""Mean-value-coordinate (MVC) cloning.

A cloned pixel is the source colour plus a membrane: the MVC-weighted
interpolation of the colour differences ``target - source`` sampled on the
region's contour. With the coefficient ``k = 1`` the clone meets the target
exactly on the contour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import map_chunks
from .imaging import Frame, as_array
from .trimap import (
    DEFAULT_MAX_VERTICES,
    BoundaryList,
    Trimap,
    TrimapFlow,
    extract_boundary,
    hierarchical_boundary_sample,
)

VERTEX_EPS = 1e-9
SOURCE_FORMS = ("multiplicative", "additive")
_CHUNK = 2048


@dataclass(frozen=True)
class MeanValueWeights:
    inner_pixel: tuple
    weights: np.ndarray
    raw: np.ndarray


@dataclass(frozen=True)
class CloneParams:
    """Clone coefficient ``k`` scaling the membrane, normalized to [0, 1]."""

    k: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"k must lie in [0, 1], got {self.k}")


def _vertices(boundary) -> np.ndarray:
    if isinstance(boundary, BoundaryList):
        return boundary.vertices.astype(np.float64)
    return np.asarray(boundary, dtype=np.float64).reshape(-1, 2)


def point_in_polygon(p, verts) -> bool:
    """Even-odd test; points on an edge count as outside."""
    x, y = float(p[0]), float(p[1])
    v = np.asarray(verts, dtype=np.float64)
    a = v
    b = np.roll(v, -1, axis=0)
    e = b - a
    rel = np.array([x, y]) - a
    cross = e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0]
    dot = (rel * e).sum(axis=1)
    on_edge = (np.abs(cross) <= 1e-12 * (np.hypot(*e.T) + 1.0)) & (dot >= 0) & (dot <= (e * e).sum(axis=1))
    if on_edge.any():
        return False
    straddle = (a[:, 1] > y) != (b[:, 1] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = a[:, 0] + (y - a[:, 1]) * e[:, 0] / e[:, 1]
    return bool(np.count_nonzero(straddle & (x < xcross)) % 2)


def _raw_weights(points: np.ndarray, verts: np.ndarray):
    """Tangent-half-angle weights for many points; returns (raw, normalized).

    Points on a vertex get an indicator row and points on an edge get the
    linear interpolation along that edge. Both rows are returned as raw and
    normalized at once.
    """
    d = verts[None, :, :] - points[:, None, :]
    r = np.hypot(d[..., 0], d[..., 1])
    dn = np.roll(d, -1, axis=1)
    rn = np.roll(r, -1, axis=1)
    cross = d[..., 0] * dn[..., 1] - d[..., 1] * dn[..., 0]
    dot = (d * dn).sum(axis=2)
    denom = r * rn + dot
    on_vertex = r < VERTEX_EPS
    on_edge = (denom <= 1e-12 * r * rn) & ~on_vertex & ~np.roll(on_vertex, -1, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tan_half = np.where(on_edge | on_vertex | np.roll(on_vertex, -1, axis=1), 0.0, cross / denom)
        raw = (np.roll(tan_half, 1, axis=1) + tan_half) / r
        total = raw.sum(axis=1, keepdims=True)
        lam = raw / total

    special = on_vertex.any(axis=1) | on_edge.any(axis=1) | ~np.isfinite(lam).all(axis=1)
    if special.any():
        m = verts.shape[0]
        for row in np.nonzero(special)[0]:
            ind = np.zeros(m)
            if on_vertex[row].any():
                ind[np.argmax(on_vertex[row])] = 1.0
            elif on_edge[row].any():
                i = int(np.argmax(on_edge[row]))
                j = (i + 1) % m
                t = r[row, i] / (r[row, i] + r[row, j])
                ind[i] = 1.0 - t
                ind[j] = t
            else:
                # zero total weight: only reachable far outside the contour
                ind[np.argmin(r[row])] = 1.0
            raw[row] = ind
            lam[row] = ind
    return raw, lam


def mean_value_coordinates(p, boundary) -> MeanValueWeights:
    """Mean value coordinates of the point ``p`` inside a closed polygon.

    w_i = (tan(theta_{i-1}/2) + tan(theta_i/2)) / |v_i - p|, where theta_i is
    the signed angle at ``p`` between v_i and v_{i+1}; lambda_i = w_i / sum(w).

    Raises ``ValueError`` when ``p`` is outside the polygon or on an edge. A
    point within 1e-9 of a vertex gets weight 1 on that vertex.
    """
    verts = _vertices(boundary)
    if len(verts) < 3:
        raise ValueError("need at least 3 boundary vertices")
    pt = np.asarray(p, dtype=np.float64).reshape(1, 2)
    dist = np.hypot(*(verts - pt).T)
    if dist.min() >= VERTEX_EPS and not point_in_polygon(pt[0], verts):
        raise ValueError(f"point {tuple(pt[0])} is not strictly inside the boundary polygon")
    raw, lam = _raw_weights(pt, verts)
    return MeanValueWeights(tuple(pt[0]), lam[0], raw[0])


def mvc_weight_matrix(points, boundary) -> np.ndarray:
    """Normalized MVC weights, shape (n_points, n_vertices).

    Unlike :func:`mean_value_coordinates` this does not reject points, since
    pixels of a clone region can sit on or just outside a subsampled contour.
    Rows are computed in fixed-size chunks (threaded when allowed); the result
    does not depend on the worker count.
    """
    verts = _vertices(boundary)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    chunks = [pts[i:i + _CHUNK] for i in range(0, len(pts), _CHUNK)]
    if not chunks:
        return np.zeros((0, len(verts)))
    parts = map_chunks(lambda c: _raw_weights(c, verts)[1], chunks)
    return np.concatenate(parts, axis=0)


def membrane(weights, boundary_diffs) -> np.ndarray:
    """Interpolate per-vertex differences: r(p) = sum_i lambda_i(p) * diff_i."""
    lam = weights.weights if isinstance(weights, MeanValueWeights) else np.asarray(weights, dtype=np.float64)
    diffs = np.asarray(boundary_diffs, dtype=np.float64)
    if lam.shape[-1] != diffs.shape[0]:
        raise ValueError(f"{lam.shape[-1]} weights for {diffs.shape[0]} boundary differences")
    if lam.ndim == 1:
        return np.einsum("i,ic->c", lam, diffs)
    return np.einsum("ni,ic->nc", lam, diffs)


def motion_compensate(source, shift) -> np.ndarray:
    """Sample ``source`` at ``p - shift`` (edge pixels replicated off-canvas)."""
    src = as_array(source)
    dx, dy = int(shift[0]), int(shift[1])
    if dx == 0 and dy == 0:
        return src
    h, w = src.shape[:2]
    xs = np.clip(np.arange(w) - dx, 0, w - 1)
    ys = np.clip(np.arange(h) - dy, 0, h - 1)
    return src[ys[:, None], xs[None, :]]


def region_pixels(trimap: Trimap) -> np.ndarray:
    """All Foreground-or-Unknown pixels as (x, y), raster order."""
    ys, xs = np.nonzero(trimap.region)
    return np.stack([xs, ys], axis=1)


def clone_region(source, target, trimap: Trimap, flow: TrimapFlow | None = None,
                 params: CloneParams = CloneParams(), mixing=None, *,
                 frame_index: int = 0, max_vertices: int = DEFAULT_MAX_VERTICES,
                 source_form: str = "multiplicative") -> Frame:
    """Clone the trimap region of ``source`` into ``target``.

    Inside the region ``out(p) = S(p) + k * r(p)``, with ``r`` the membrane of
    ``target - S`` over the hierarchically sampled contour. For frames after
    the first, ``source`` is the previous source frame and ``S(p)`` reads it
    at ``p - flow.shift``; the contour is that of the (already propagated)
    ``trimap``.

    With ``mixing`` given, the source term becomes ``Ma(p) * S(p)``, or
    ``Ma(p) + S(p)`` when ``source_form="additive"``. Pixels outside the region
    copy the target.
    """
    src = as_array(source)
    tgt = as_array(target)
    if src.shape != tgt.shape or src.shape[:2] != trimap.shape:
        raise ValueError("source, target and trimap must share dimensions")
    if frame_index >= 1 and flow is None:
        raise ValueError(f"frame {frame_index}: trimap flow is required after the first frame")
    if source_form not in SOURCE_FORMS:
        raise ValueError(f"source_form must be one of {SOURCE_FORMS}")
    if mixing is not None and np.shape(mixing.ma) != trimap.shape:
        raise ValueError("mixing weights do not match the frame dimensions")

    shifted = motion_compensate(src, flow.shift) if flow is not None else src
    delta, _ = extract_boundary(trimap)
    sampled = hierarchical_boundary_sample(delta, max_vertices)
    vx, vy = sampled.vertices[:, 0], sampled.vertices[:, 1]
    diffs = tgt[vy, vx] - shifted[vy, vx]

    pix = region_pixels(trimap)
    lam = mvc_weight_matrix(pix, sampled)
    r = membrane(lam, diffs)

    px, py = pix[:, 0], pix[:, 1]
    base = shifted[py, px]
    if mixing is not None:
        ma = np.asarray(mixing.ma)[py, px][:, None]
        base = ma * base if source_form == "multiplicative" else ma + base
    out = np.array(tgt, copy=True)
    out[py, px] = base + params.k * r
    return Frame(out, "cloned")
