"""Synthetic source/target sequences with exact ground-truth composites.

The source shows a textured disc (the "hand") on a dark field, moving by a
fixed integer translation per frame. The target is a textured scene whose
brightness is scaled by ``illumination``. The ground truth composites the
hand layer over the target with the known soft matte:

    truth = matte * hand + (1 - matte) * target
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .imaging import Frame, save_frame
from .trimap import Label, Trimap, save_trimap


@dataclass(frozen=True)
class SceneSpec:
    width: int = 96
    height: int = 96
    radius: float = 20.0
    band: float = 5.0
    center: tuple | None = None
    translation: tuple = (1, 0)
    frames: int = 10
    illumination: float = 1.5
    noise: float = 0.01
    seed: int = 0
    hand_colour: tuple = (0.70, 0.55, 0.45)
    hand_texture: float = 0.06
    field_level: float = 0.05
    scene_colour: tuple = (0.40, 0.28, 0.25)
    scene_texture: float = 0.10

    def centre_at(self, n: int) -> tuple:
        cx, cy = self.center if self.center is not None else (self.width / 2, self.height / 2)
        return (cx + n * self.translation[0], cy + n * self.translation[1])

    def validate(self) -> None:
        if self.width < 1 or self.height < 1 or self.frames < 1:
            raise ValueError("width, height and frames must be positive")
        if self.radius <= 0 or self.band <= 0:
            raise ValueError("radius and band must be positive")
        outer = self.radius + self.band
        for n in (0, self.frames - 1):
            cx, cy = self.centre_at(n)
            if cx - outer < 0 or cy - outer < 0 or cx + outer > self.width - 1 or cy + outer > self.height - 1:
                raise ValueError(f"disc leaves the {self.width}x{self.height} canvas at frame {n}")


@dataclass
class Scene:
    spec: SceneSpec
    source: list
    target: list
    truth: list
    mattes: list
    trimap0: Trimap

    def trimap_at(self, n: int) -> Trimap:
        return disc_trimap(self.spec, n)


def _texture(rng, shape, sigma):
    t = gaussian_filter(rng.normal(size=shape + (3,)), (sigma, sigma, 0))
    return t / (np.abs(t).max() + 1e-12)


def _distance(spec: SceneSpec, n: int) -> np.ndarray:
    cx, cy = spec.centre_at(n)
    yy, xx = np.mgrid[:spec.height, :spec.width]
    return np.hypot(xx - cx, yy - cy)


def disc_matte(spec: SceneSpec, n: int) -> np.ndarray:
    """1 inside ``radius``, linear fall-off to 0 across the ``band``."""
    return np.clip((spec.radius + spec.band - _distance(spec, n)) / spec.band, 0.0, 1.0)


def disc_trimap(spec: SceneSpec, n: int = 0) -> Trimap:
    """Foreground inside ``radius``, Unknown out to ``radius + band``."""
    d = _distance(spec, n)
    lab = np.full(d.shape, Label.BACKGROUND, dtype=np.uint8)
    lab[d <= spec.radius + spec.band] = Label.UNKNOWN
    lab[d <= spec.radius] = Label.FOREGROUND
    return Trimap(lab)


def target_frames(spec: SceneSpec, illumination: float | None = None) -> list:
    """Unclamped target frames; brightness scales linearly with ``illumination``."""
    scale = spec.illumination if illumination is None else illumination
    rng = np.random.default_rng([spec.seed, 2])
    shape = (spec.height, spec.width)
    scene = np.asarray(spec.scene_colour) + spec.scene_texture * _texture(rng, shape, 2.0)
    return [scale * (scene + spec.noise * rng.normal(size=shape + (3,))) for _ in range(spec.frames)]


def generate_scene(spec: SceneSpec) -> Scene:
    spec.validate()
    rng = np.random.default_rng([spec.seed, 1])
    h, w = spec.height, spec.width
    tx, ty = spec.translation
    steps = spec.frames - 1
    # hand texture lives on a canvas large enough to slide under the disc
    pad_x, pad_y = abs(tx) * steps, abs(ty) * steps
    big = np.asarray(spec.hand_colour) + spec.hand_texture * _texture(
        rng, (h + pad_y, w + pad_x), 1.5)
    field = spec.field_level + np.zeros((h, w, 3))
    ox0 = pad_x if tx > 0 else 0
    oy0 = pad_y if ty > 0 else 0

    source, truth, mattes = [], [], []
    targets = target_frames(spec)
    for n in range(spec.frames):
        ox, oy = ox0 - n * tx, oy0 - n * ty
        hand = big[oy:oy + h, ox:ox + w]
        a = disc_matte(spec, n)[:, :, None]
        src = a * hand + (1 - a) * field + spec.noise * rng.normal(size=(h, w, 3))
        source.append(Frame(src, "source"))
        truth.append(Frame(a * hand + (1 - a) * targets[n], "reference"))
        mattes.append(a[:, :, 0])
    target = [Frame(t, "target") for t in targets]
    return Scene(spec, source, target, truth, mattes, disc_trimap(spec, 0))


def bundled_suite(count: int = 10) -> list:
    """The fixed illumination-mismatch suite: ``count`` 10-frame scenes, target x1.5."""
    motions = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (2, 0), (1, -1), (0, 2), (-1, -1)]
    specs = []
    for i in range(count):
        specs.append(SceneSpec(
            seed=100 + i,
            radius=18.0 + (i % 4),
            translation=motions[i % len(motions)],
            illumination=1.5,
        ))
    return specs


def write_scene(scene: Scene, out_dir) -> Path:
    """Write ``source/``, ``target/``, ``truth/``, ``matte/`` frames, ``trimap.png`` and ``scene.json``."""
    out = Path(out_dir)
    for sub in ("source", "target", "truth", "matte"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    for n in range(scene.spec.frames):
        name = f"frame_{n:04d}.png"
        save_frame(scene.source[n], out / "source" / name)
        save_frame(scene.target[n], out / "target" / name)
        save_frame(scene.truth[n], out / "truth" / name)
        save_frame(np.repeat(scene.mattes[n][:, :, None], 3, axis=2), out / "matte" / name)
    save_trimap(scene.trimap0, out / "trimap.png")
    (out / "scene.json").write_text(json.dumps(asdict(scene.spec), indent=2) + "\n")
    return out
