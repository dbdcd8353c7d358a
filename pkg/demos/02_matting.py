"""Swarm-sampled alpha matting on a soft edge.

A straight Unknown band holds a linear alpha ramp between a light
Foreground and a dark Background. Each Unknown pixel gathers nearby
Foreground and Background samples, a particle swarm picks the best pair,
and a colour-affinity filter smooths the result.

    python demos/02_matting.py [OUT_DIR]
"""

import sys
from pathlib import Path

import numpy as np
from PIL import Image

from gradient_weave import PsoConfig, Trimap, correlation_matte, smooth_matte

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/matting")
out.mkdir(parents=True, exist_ok=True)

h, w, n = 40, 48, 16
yy, xx = np.mgrid[:h, :w]
x0 = 16
alpha = np.clip((x0 + n + 1 - xx) / (n + 1), 0, 1)
t = (yy / h)[..., None]
fg = np.array([0.85, 0.7, 0.6]) + 0.08 * np.sin(3 * t)
bg = np.array([0.1, 0.2, 0.3]) + 0.08 * np.cos(4 * t)
img = alpha[..., None] * fg + (1 - alpha[..., None]) * bg
trimap = Trimap(np.where(alpha >= 1, 2, np.where(alpha <= 0, 0, 1)).astype(np.uint8))
unknown = trimap.labels == 1

raw = correlation_matte(img, trimap, PsoConfig(seed=7))
smooth = smooth_matte(raw, img, trimap)

for name, m in (("raw", raw), ("smoothed", smooth)):
    err = np.abs(m.alpha - alpha)[unknown]
    print(f"{name:9s} mean |alpha error| on {unknown.sum()} Unknown px: {err.mean():.4f}")

# one row across the band
row = h // 2
cols = slice(x0 - 1, x0 + n + 2)
print("true    :", np.round(alpha[row, cols], 2))
print("smoothed:", np.round(smooth.alpha[row, cols], 2))

for name, a in (("truth", alpha), ("raw", raw.alpha), ("smoothed", smooth.alpha)):
    Image.fromarray(np.round(a * 255).astype(np.uint8)).save(out / f"{name}.png")
print(f"wrote mattes to {out}")
