"""Frame containers, 8-bit image I/O and finite-difference gradients."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

ROLES = (
    "source",
    "target",
    "cloned",
    "matte_composite",
    "layered",
    "reference",
)


@dataclass(frozen=True)
class Frame:
    """An H x W x 3 image with values in [0, 1].

    The array is clamped on construction and stored read-only, so a frame can
    be shared between workers without copying.
    """

    data: np.ndarray
    role: str = "source"

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"frame must have shape (H, W, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("frame must be at least 1x1")
        if self.role not in ROLES:
            raise ValueError(f"unknown frame role {self.role!r}")
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def with_role(self, role: str) -> "Frame":
        return Frame(self.data, role)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)


def as_array(f) -> np.ndarray:
    """Return the float64 H x W x 3 array behind a Frame or array-like."""
    if isinstance(f, Frame):
        return f.data
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got {arr.shape}")
    return arr


def to_bytes(values) -> np.ndarray:
    """Quantize [0, 1] values to uint8 with round-half-up."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def _read_image(path) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ValueError(f"unsupported image file {path}: {exc}") from exc
    if img.format not in ("PNG", "PPM"):
        raise ValueError(f"unsupported image format {img.format!r} in {path}")
    if img.width < 1 or img.height < 1:
        raise ValueError(f"zero-dimension image {path}")
    return img


def load_frame(path, role: str = "source") -> Frame:
    """Load an 8-bit PNG or binary PPM as a normalized frame.

    Grayscale images are replicated across the three channels and any alpha
    channel is discarded. Byte values are divided by 255 exactly.
    """
    img = _read_image(path)
    if img.mode in ("I", "I;16", "I;16B", "F"):
        raise ValueError(f"only 8-bit images are supported, got mode {img.mode}")
    if img.mode in ("L", "1", "P", "LA"):
        img = img.convert("L")
        arr = np.asarray(img, dtype=np.uint8)
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    else:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return Frame(arr.astype(np.float64) / 255.0, role)


def save_frame(f, path) -> None:
    """Write a frame as 8-bit RGB; the format follows the file suffix (.png or .ppm)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".png", ".ppm"):
        raise ValueError(f"unsupported output format {suffix!r}")
    img = Image.fromarray(to_bytes(as_array(f)), mode="RGB")
    try:
        img.save(path, format="PNG" if suffix == ".png" else "PPM")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def load_gray(path) -> np.ndarray:
    """Load an 8-bit image as a single-channel uint8 array."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ValueError(f"unsupported image file {path}: {exc}") from exc
    if img.format not in ("PNG", "PPM"):
        raise ValueError(f"unsupported image format {img.format!r} in {path}")
    return np.asarray(img.convert("L"), dtype=np.uint8)


def save_gray(values: np.ndarray, path) -> None:
    """Write a uint8 array as an 8-bit grayscale PNG/PGM."""
    path = Path(path)
    fmt = "PNG" if path.suffix.lower() == ".png" else "PPM"
    Image.fromarray(np.asarray(values, dtype=np.uint8), mode="L").save(path, format=fmt)


def compute_gradient(f) -> np.ndarray:
    """Forward-difference gradient of a frame.

    Parameters
    ----------
    f : Frame or ndarray
        Image of shape (H, W, 3).

    Returns
    -------
    ndarray
        Array of shape (H, W, 3, 2); the last axis holds (d/dx, d/dy). The
        last column and last row reuse the backward difference so the field
        has the frame's dimensions. A 1-pixel-wide axis has zero derivative.
    """
    v = as_array(f)
    h, w = v.shape[:2]
    g = np.zeros(v.shape + (2,), dtype=np.float64)
    if w > 1:
        dx = v[:, 1:] - v[:, :-1]
        g[:, :-1, :, 0] = dx
        g[:, -1, :, 0] = dx[:, -1]
    if h > 1:
        dy = v[1:] - v[:-1]
        g[:-1, :, :, 1] = dy
        g[-1, :, :, 1] = dy[-1]
    return g
