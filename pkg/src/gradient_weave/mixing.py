"""Illumination-aware gradient mixing weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import as_array

DEGENERATE_NORM = 1e-12


@dataclass(frozen=True)
class MixingWeights:
    """Per-pixel mixing quantities; fields not computed by a routine stay None.

    ma : (H, W) gradient-energy ratio in [0, 1]
    a : (H, W) legacy weight ``ma + mean(colour_shift)``, unclamped
    colour_shift : (H, W, 3) discolouration term
    b_selector : (H, W, 2) per-pixel blend vector for :func:`mixed_gradient`
    """

    ma: np.ndarray | None = None
    a: np.ndarray | None = None
    colour_shift: np.ndarray | None = None
    b_selector: np.ndarray | None = None

    @property
    def shape(self):
        return np.shape(self.ma)


def _check_pair(gs, gt):
    gs = np.asarray(gs, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if gs.shape != gt.shape:
        raise ValueError(f"gradient fields differ in shape: {gs.shape} vs {gt.shape}")
    if gs.ndim != 4 or gs.shape[-1] != 2:
        raise ValueError(f"expected (H, W, C, 2) gradient fields, got {gs.shape}")
    return gs, gt


def gradient_energy(g) -> np.ndarray:
    """Squared gradient norm pooled over both components and all channels."""
    g = np.asarray(g, dtype=np.float64)
    return (g * g).sum(axis=(-2, -1))


def _ratio(gs, gt):
    es = gradient_energy(gs)
    et = gradient_energy(gt)
    total = es + et
    flat = (es < DEGENERATE_NORM ** 2) & (et < DEGENERATE_NORM ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ma = np.where(flat, 0.5, es / np.where(flat, 1.0, total))
    return ma


def mixing_weight(gs, gt) -> MixingWeights:
    """Ma = |Gs|^2 / (|Gs|^2 + |Gt|^2) per pixel; 0.5 where both gradients vanish.

    Norms below 1e-12 count as vanishing.
    """
    gs, gt = _check_pair(gs, gt)
    return MixingWeights(ma=_ratio(gs, gt))


def legacy_mixing_weight(gs, gt, c_shift) -> MixingWeights:
    """Legacy weight a = Ma + mean over channels of ``c_shift`` (not clamped)."""
    gs, gt = _check_pair(gs, gt)
    shift = np.asarray(c_shift, dtype=np.float64)
    if shift.shape != gs.shape[:2] + (3,):
        shift = np.broadcast_to(shift, gs.shape[:2] + (3,))
    ma = _ratio(gs, gt)
    return MixingWeights(ma=ma, a=ma + shift.mean(axis=-1), colour_shift=shift)


def discolouration_shift(current_source, previous_source) -> np.ndarray:
    """Mean colour of the current source frame minus that of the previous one,
    broadcast to every pixel as an (H, W, 3) array."""
    cur = as_array(current_source)
    prev = as_array(previous_source)
    if cur.shape != prev.shape:
        raise ValueError("source frames differ in shape")
    delta = cur.reshape(-1, 3).mean(axis=0) - prev.reshape(-1, 3).mean(axis=0)
    return np.broadcast_to(delta, cur.shape).copy()


def mixed_gradient(gs, gt, b=None) -> np.ndarray:
    """Hadamard blend G = b * Gs + ((1, 1) - b) * Gt per channel.

    ``b`` has shape (H, W, 2) (or broadcasts to it) with entries in [0, 1];
    by default it is (Ma, Ma) at each pixel.
    """
    gs, gt = _check_pair(gs, gt)
    if b is None:
        ma = _ratio(gs, gt)
        b = np.stack([ma, ma], axis=-1)
    b = np.broadcast_to(np.asarray(b, dtype=np.float64), gs.shape[:2] + (2,))
    if (b < 0).any() or (b > 1).any():
        raise ValueError("b components must lie in [0, 1]")
    bb = b[:, :, None, :]
    return bb * gs + (1.0 - bb) * gt
