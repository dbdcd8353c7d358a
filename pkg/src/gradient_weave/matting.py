"""Sampling-based alpha matting for the Unknown band of a trimap.

For every Unknown pixel z:

1. gather nearby Foreground and Background candidates and drop near-duplicate
   colours (``collect_samples``);
2. search the (foreground, background) index grid with a particle swarm for
   the pair that best explains the observed colour (``pso_select``);
3. project the observed colour on the chosen pair's colour segment to get
   alpha (``estimate_alpha``).

The raw matte is then smoothed with a colour-affinity kernel
(``smooth_matte``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._parallel import map_chunks
from .imaging import Frame, as_array, save_gray, to_bytes
from .trimap import Trimap

SPATIAL_WEIGHT = 0.1
DEFAULT_MAX_PER_SIDE = 16
DEFAULT_SUPPRESSION = 0.05
DEFAULT_SMOOTH_RADIUS = 2
DEFAULT_SIGMA_C = 0.1
_DEGENERATE = 1e-12
_CHUNK = 512


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 20
    iterations: int = 40
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    seed: int = 42

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ValueError("swarm_size must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.inertia < 1.0:
            raise ValueError("inertia must lie in (0, 1)")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("cognitive and social coefficients must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CandidateSet:
    """Foreground and background candidates for one Unknown pixel.

    Colours are (n, 3) arrays and positions (n, 2) arrays of (x, y), ordered
    by increasing pixel distance to the Unknown pixel. ``diagonal`` is the
    image diagonal in pixels, which normalizes the spatial fitness term.
    """

    f_colours: np.ndarray
    f_positions: np.ndarray
    b_colours: np.ndarray
    b_positions: np.ndarray
    diagonal: float


@dataclass(frozen=True)
class SamplePair:
    f_index: int
    b_index: int
    f_colour: np.ndarray
    b_colour: np.ndarray
    f_pos: tuple
    b_pos: tuple
    z_colour: np.ndarray
    z_pos: tuple = (0, 0)


@dataclass(frozen=True)
class AlphaMatte:
    """Per-pixel opacity in [0, 1]: 1 on Foreground, 0 on Background."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("alpha matte must be 2-D")
        if (a < 0).any() or (a > 1).any():
            raise ValueError("alpha values must lie in [0, 1]")
        a.flags.writeable = False
        object.__setattr__(self, "alpha", a)

    @property
    def shape(self):
        return self.alpha.shape


# ---------------------------------------------------------------- alpha & cost

def _alpha(iz, f, b):
    """Vectorized clamped projection of ``iz`` on segment [b, f] (last axis = colour)."""
    fb = f - b
    den = (fb * fb).sum(axis=-1)
    num = ((iz - b) * fb).sum(axis=-1)
    degenerate = den < _DEGENERATE
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.clip(num / np.where(degenerate, 1.0, den), 0.0, 1.0)
    if degenerate.any():
        near_f = _norm(iz - f) <= _norm(iz - b)
        a = np.where(degenerate, np.where(near_f, 1.0, 0.0), a)
    return a


def _norm(v):
    return np.sqrt((v * v).sum(axis=-1))


def _cost(iz, zpos, f, fpos, b, bpos, diagonal, eta):
    a = _alpha(iz, f, b)[..., None]
    chroma = _norm(iz - (a * f + (1.0 - a) * b))
    spatial = _norm(zpos - fpos) + _norm(zpos - bpos)
    return chroma + eta * spatial / diagonal


def estimate_alpha(pair: SamplePair) -> float:
    """alpha = (I_z - B).(F - B) / |F - B|^2 clamped to [0, 1].

    When |F - B|^2 < 1e-12 the pixel snaps to whichever sample is closer
    (1 for foreground, ties included).
    """
    iz = np.asarray(pair.z_colour, dtype=np.float64)
    f = np.asarray(pair.f_colour, dtype=np.float64)
    b = np.asarray(pair.b_colour, dtype=np.float64)
    return float(_alpha(iz, f, b))


def pair_fitness(pair: SamplePair, diagonal: float, eta: float = SPATIAL_WEIGHT) -> float:
    """Chromatic distortion of the pair plus eta times its normalized spatial spread."""
    return float(_cost(
        np.asarray(pair.z_colour, dtype=np.float64),
        np.asarray(pair.z_pos, dtype=np.float64),
        np.asarray(pair.f_colour, dtype=np.float64),
        np.asarray(pair.f_pos, dtype=np.float64),
        np.asarray(pair.b_colour, dtype=np.float64),
        np.asarray(pair.b_pos, dtype=np.float64),
        diagonal, eta,
    ))


# ------------------------------------------------------------ sample gathering

def _nearest(tree, coords, colours, zs, k):
    """k nearest candidates per query, ordered by (distance, raster index)."""
    k = min(k, len(coords))
    dist, idx = tree.query(zs.astype(np.float64), k=k)
    dist = dist.reshape(len(zs), k)
    idx = idx.reshape(len(zs), k)
    order = np.lexsort((idx, dist), axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    return colours[idx], coords[idx]


def _suppress(colours, max_keep, eps):
    """Greedy affinity suppression along the candidate axis.

    A candidate is dropped when its colour lies closer than ``eps`` to one
    already retained; at most ``max_keep`` survive. Returns a keep mask.
    """
    n, k = colours.shape[:2]
    keep = np.zeros((n, k), dtype=bool)
    count = np.zeros(n, dtype=np.int64)
    kept = np.full((n, max_keep, colours.shape[2]), np.inf)
    rows = np.arange(n)
    for j in range(k):
        c = colours[:, j]
        ok = count < max_keep
        if eps > 0 and j:
            ok &= ~(_norm(kept - c[:, None, :]) < eps).any(axis=1)
        kept[rows[ok], count[ok]] = c[ok]
        keep[:, j] = ok
        count += ok
    return keep


def _compact(colours, positions, keep, max_keep):
    order = np.argsort(~keep, axis=1, kind="stable")[:, :max_keep]
    cols = np.take_along_axis(colours, order[:, :, None], axis=1)
    pos = np.take_along_axis(positions, order[:, :, None], axis=1)
    counts = np.minimum(keep.sum(axis=1), max_keep)
    return cols, pos, counts


class _Sampler:
    """Spatial indices over the Foreground and Background pixels of one frame."""

    def __init__(self, frame, trimap: Trimap, max_per_side: int, eps_a: float):
        img = as_array(frame)
        if img.shape[:2] != trimap.shape:
            raise ValueError("frame and trimap must share dimensions")
        if max_per_side < 1:
            raise ValueError("max_per_side must be >= 1")
        if eps_a < 0:
            raise ValueError("suppression radius must be non-negative")
        self.max_per_side = max_per_side
        self.eps_a = eps_a
        self.diagonal = math.hypot(*trimap.shape)
        self.sides = []
        for mask in (trimap.foreground, trimap.background):
            ys, xs = np.nonzero(mask)
            coords = np.stack([xs, ys], axis=1).astype(np.float64)
            self.sides.append((cKDTree(coords), coords, img[ys, xs]))

    def gather(self, zs):
        """Padded candidate arrays for query pixels ``zs`` (n, 2) as (x, y)."""
        out = []
        for tree, coords, colours in self.sides:
            cols, pos = _nearest(tree, coords, colours, zs, 3 * self.max_per_side)
            keep = _suppress(cols, self.max_per_side, self.eps_a)
            out.append(_compact(cols, pos, keep, self.max_per_side))
        return out


def collect_samples(frame, trimap: Trimap, z, max_per_side: int = DEFAULT_MAX_PER_SIDE,
                    eps_a: float = DEFAULT_SUPPRESSION) -> CandidateSet:
    """Nearest foreground/background candidates for Unknown pixel ``z = (x, y)``.

    The ``3 * max_per_side`` nearest pixels of each side are scanned in order
    of increasing distance; a candidate is dropped if its colour is within
    ``eps_a`` (Euclidean) of one already kept, and the survivors are cut to
    ``max_per_side``.
    """
    x, y = int(z[0]), int(z[1])
    if not trimap.unknown[y, x]:
        raise ValueError(f"pixel {(x, y)} is not labelled Unknown")
    sampler = _Sampler(frame, trimap, max_per_side, eps_a)
    (fc, fp, nf), (bc, bp, nb) = sampler.gather(np.array([[x, y]]))
    return CandidateSet(
        f_colours=fc[0, :nf[0]], f_positions=fp[0, :nf[0]],
        b_colours=bc[0, :nb[0]], b_positions=bp[0, :nb[0]],
        diagonal=sampler.diagonal,
    )


# ------------------------------------------------------------------------ PSO

def _pso_draws(entropies, sizes, cfg: PsoConfig):
    """Per-pixel random streams; the draw sequence depends only on the entropy,
    the swarm settings and that pixel's own grid size."""
    s, t = cfg.swarm_size, cfg.iterations
    p = len(entropies)
    kf, kb = int(sizes[:, 0].max()), int(sizes[:, 1].max())
    u0 = np.empty((p, s, 2))
    v0 = np.empty_like(u0)
    r = np.empty((p, t, 2, s, 2))
    rv = np.empty((p, t, s, 2))
    order = np.empty((p, kf * kb), dtype=np.int64)
    for i, ent in enumerate(entropies):
        nf, nb = int(sizes[i, 0]), int(sizes[i, 1])
        rng = np.random.default_rng(ent)
        u0[i] = rng.random((s, 2))
        v0[i] = rng.uniform(-1.0, 1.0, (s, 2))
        r[i] = rng.random((t, 2, s, 2))
        rv[i] = rng.uniform(-1.0, 1.0, (t, s, 2))
        keys = np.argsort(rng.random(nf * nb), kind="stable")
        valid = (keys // nb) * kb + keys % nb
        order[i, :nf * nb] = valid
        if nf * nb < kf * kb:
            pad = np.ones(kf * kb, dtype=bool)
            pad[valid] = False
            order[i, nf * nb:] = np.flatnonzero(pad)
    return u0, v0, r, rv, order


def _pso(fitness, sizes, draws, cfg: PsoConfig):
    """Particle swarm over the continuous boxes [0, n_f) x [0, n_b), batched.

    ``fitness(fi, bi)`` maps integer index arrays of shape (P, S) to costs.
    A particle whose move lands on an already evaluated cell is re-seeded to
    the next unevaluated cell of a per-pixel random exploration order (with a
    fresh random velocity); once every cell has been seen it keeps moving
    normally. Returns the global-best indices (P, 2) and their costs (P,).
    """
    u0, v0, r, rv, order = draws
    n_p, n_s = u0.shape[:2]
    kf, kb = int(sizes[:, 0].max()), int(sizes[:, 1].max())
    upper = sizes.astype(np.float64)[:, None, :]
    top = upper - 1e-9
    rows = np.arange(n_p)
    n_k = kf * kb
    grid_f = np.arange(kf)[None, :, None] < sizes[:, 0, None, None]
    grid_b = np.arange(kb)[None, None, :] < sizes[:, 1, None, None]
    seen = ~(grid_f & grid_b).reshape(n_p, kf * kb)

    def cells(pos):
        idx = np.minimum(np.floor(pos).astype(np.int64), sizes[:, None, :] - 1)
        return idx[..., 0] * kb + idx[..., 1]

    def reseed(pos, vel, vel_draw):
        flat = cells(pos)
        # particles sharing a fresh cell: all but the first count as revisits
        by_cell = np.argsort(flat, axis=1, kind="stable")
        sorted_cells = np.take_along_axis(flat, by_cell, axis=1)
        dup = np.zeros(flat.shape, dtype=bool)
        np.put_along_axis(dup, by_cell[:, 1:], sorted_cells[:, 1:] == sorted_cells[:, :-1], axis=1)
        need = np.take_along_axis(seen, flat, axis=1) | dup
        if need.any():
            unseen = ~np.take_along_axis(seen, order, axis=1)
            rank = np.cumsum(unseen, axis=1)
            slot = np.cumsum(need, axis=1) - 1
            # k-th unseen cell of each row: first index whose running count exceeds k
            found = need & (slot < rank[:, -1:])
            stride = n_k + 1
            flat_rank = (rank + rows[:, None] * stride).ravel()
            want = (slot + 1 + rows[:, None] * stride).ravel()
            k = np.searchsorted(flat_rank, want, side="left").reshape(slot.shape) - rows[:, None] * n_k
            k = np.clip(k, 0, n_k - 1)
            cell = np.take_along_axis(order, k, axis=1)
            fresh = np.stack([cell // kb, cell % kb], axis=-1) + 0.5
            pos = np.where(found[..., None], fresh, pos)
            vel = np.where(found[..., None], vel_draw * upper, vel)
            flat = np.where(found, cell, flat)
        np.put_along_axis(seen, flat, True, axis=1)
        return pos, vel, flat

    x = u0 * upper
    v = v0 * upper
    x, v, flat = reseed(x, v, v0)
    f = fitness(flat // kb, flat % kb)
    pbest, pbest_f = x.copy(), f
    g = np.argmin(f, axis=1)
    gbest, gbest_f = x[rows, g].copy(), f[rows, g].copy()
    for it in range(cfg.iterations):
        r1, r2 = r[:, it, 0], r[:, it, 1]
        v = (cfg.inertia * v
             + cfg.cognitive * r1 * (pbest - x)
             + cfg.social * r2 * (gbest[:, None, :] - x))
        v = np.clip(v, -upper, upper)
        x = np.clip(x + v, 0.0, top)
        x, v, flat = reseed(x, v, rv[:, it])
        f = fitness(flat // kb, flat % kb)
        better = f < pbest_f
        pbest = np.where(better[..., None], x, pbest)
        pbest_f = np.where(better, f, pbest_f)
        g = np.argmin(pbest_f, axis=1)
        improved = pbest_f[rows, g] < gbest_f
        gbest[improved] = pbest[rows, g][improved]
        gbest_f[improved] = pbest_f[rows, g][improved]
    idx = np.minimum(np.floor(gbest).astype(np.int64), sizes - 1)
    return idx, gbest_f


def _batch_fitness(iz, zpos, fc, fp, bc, bp, diagonal, eta):
    """Fitness lookup over a precomputed (P, k_f * k_b) table of pair costs."""
    kb = bc.shape[1]
    table = _cost(
        iz[:, None, None, :], zpos[:, None, None, :],
        fc[:, :, None, :], fp[:, :, None, :], bc[:, None, :, :], bp[:, None, :, :],
        diagonal, eta,
    ).reshape(len(iz), -1)

    def fitness(fi, bi):
        return np.take_along_axis(table, fi * kb + bi, axis=1)
    return fitness


def pso_select(cands: CandidateSet, z_colour, z_pos, cfg: PsoConfig = PsoConfig(), *,
               entropy=None, eta: float = SPATIAL_WEIGHT) -> SamplePair:
    """Pick the (foreground, background) candidate pair minimizing
    :func:`pair_fitness` with a particle swarm.

    Particles move in [0, n_f) x [0, n_b); a position is evaluated at its
    floored indices. Velocities follow
    ``v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`` and are limited to
    the box size, positions are clamped into the box. Random numbers come
    from ``numpy.random.default_rng(entropy)``, ``entropy`` defaulting to
    ``cfg.seed``, so equal seeds give equal selections.
    """
    nf, nb = len(cands.f_colours), len(cands.b_colours)
    if nf == 0 or nb == 0:
        raise ValueError("candidate lists must be non-empty")
    iz = np.asarray(z_colour, dtype=np.float64).reshape(1, 3)
    zp = np.asarray(z_pos, dtype=np.float64).reshape(1, 2)
    fitness = _batch_fitness(
        iz, zp,
        np.asarray(cands.f_colours, dtype=np.float64)[None],
        np.asarray(cands.f_positions, dtype=np.float64)[None],
        np.asarray(cands.b_colours, dtype=np.float64)[None],
        np.asarray(cands.b_positions, dtype=np.float64)[None],
        cands.diagonal, eta,
    )
    ent = cfg.seed if entropy is None else entropy
    sizes = np.array([[nf, nb]])
    idx, _ = _pso(fitness, sizes, _pso_draws([ent], sizes, cfg), cfg)
    fi, bi = int(idx[0, 0]), int(idx[0, 1])
    return SamplePair(
        f_index=fi, b_index=bi,
        f_colour=np.asarray(cands.f_colours[fi], dtype=np.float64),
        b_colour=np.asarray(cands.b_colours[bi], dtype=np.float64),
        f_pos=tuple(np.asarray(cands.f_positions[fi]).tolist()),
        b_pos=tuple(np.asarray(cands.b_positions[bi]).tolist()),
        z_colour=iz[0], z_pos=tuple(zp[0].tolist()),
    )


# --------------------------------------------------------------- matte passes

def correlation_matte(frame, trimap: Trimap, cfg: PsoConfig = PsoConfig(), *,
                      max_per_side: int = DEFAULT_MAX_PER_SIDE,
                      eps_a: float = DEFAULT_SUPPRESSION,
                      eta: float = SPATIAL_WEIGHT) -> AlphaMatte:
    """Raw (unsmoothed) matte: one candidate search and swarm per Unknown pixel.

    Pixel ``(x, y)`` draws its random stream from ``(cfg.seed, y * W + x)``,
    which makes the result independent of chunking and worker count.
    """
    img = as_array(frame)
    h, w = trimap.shape
    alpha = trimap.foreground.astype(np.float64)
    uy, ux = np.nonzero(trimap.unknown)
    if len(ux) == 0:
        return AlphaMatte(alpha)
    sampler = _Sampler(img, trimap, max_per_side, eps_a)
    zs = np.stack([ux, uy], axis=1)

    def solve(chunk):
        (fc, fp, nf), (bc, bp, nb) = sampler.gather(chunk)
        iz = img[chunk[:, 1], chunk[:, 0]]
        zpos = chunk.astype(np.float64)
        fitness = _batch_fitness(iz, zpos, fc, fp, bc, bp, sampler.diagonal, eta)
        ents = [(cfg.seed, int(y) * w + int(x)) for x, y in chunk]
        sizes = np.stack([nf, nb], axis=1)
        idx, _ = _pso(fitness, sizes, _pso_draws(ents, sizes, cfg), cfg)
        rows = np.arange(len(chunk))
        return _alpha(iz, fc[rows, idx[:, 0]], bc[rows, idx[:, 1]])

    parts = map_chunks(solve, [zs[i:i + _CHUNK] for i in range(0, len(zs), _CHUNK)])
    alpha[uy, ux] = np.concatenate(parts)
    return AlphaMatte(alpha)


def smooth_matte(raw: AlphaMatte, frame, trimap: Trimap, radius: int = DEFAULT_SMOOTH_RADIUS,
                 sigma_c: float = DEFAULT_SIGMA_C) -> AlphaMatte:
    """Colour-affinity smoothing of the Unknown pixels of a matte.

    Each Unknown pixel becomes the average of the alphas in its
    (2 radius + 1)^2 window (clipped to the canvas), weighted by
    ``exp(-|I(z) - I(q)|^2 / sigma_c^2)``. Foreground and Background pixels
    keep 1 and 0 and take part as neighbours with those values.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if sigma_c <= 0:
        raise ValueError("sigma_c must be positive")
    img = as_array(frame)
    a = np.asarray(raw.alpha, dtype=np.float64)
    if img.shape[:2] != a.shape or trimap.shape != a.shape:
        raise ValueError("matte, frame and trimap must share dimensions")
    base = np.where(trimap.foreground, 1.0, np.where(trimap.background, 0.0, a))
    if radius == 0:
        return AlphaMatte(base)
    h, w = a.shape
    pad_img = np.pad(img, ((radius, radius), (radius, radius), (0, 0)))
    pad_a = np.pad(base, radius)
    pad_ok = np.pad(np.ones((h, w)), radius)
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            sl = (slice(radius + dy, radius + dy + h), slice(radius + dx, radius + dx + w))
            diff = img - pad_img[sl]
            wgt = np.exp(-(diff * diff).sum(axis=-1) / sigma_c ** 2) * pad_ok[sl]
            num += wgt * pad_a[sl]
            den += wgt
    out = np.where(trimap.unknown, num / den, base)
    return AlphaMatte(np.clip(out, 0.0, 1.0))


def matte_composite(matte: AlphaMatte, cloned, target) -> Frame:
    """Per-pixel convex blend ``alpha * cloned + (1 - alpha) * target``."""
    c = as_array(cloned)
    t = as_array(target)
    a = np.asarray(matte.alpha)[:, :, None]
    if c.shape != t.shape or c.shape[:2] != matte.shape:
        raise ValueError("matte, cloned and target must share dimensions")
    return Frame(a * c + (1.0 - a) * t, "matte_composite")


def baseline_matte_composite(cloned, target, alpha: float, trimap: Trimap) -> Frame:
    """Constant-alpha blend of ``cloned`` over ``target`` inside the trimap region."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    region = trimap.region.astype(np.float64)
    return matte_composite(AlphaMatte(alpha * region), cloned, target)


def save_matte(matte: AlphaMatte, path) -> None:
    """Write the matte as 8-bit grayscale (alpha * 255, rounded half up)."""
    save_gray(to_bytes(matte.alpha), path)
