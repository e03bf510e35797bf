"""Image loading and canonicalization to a square working canvas."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .errors import EmptyImageError, UnreadableImageError, UnsupportedFormatError

# Pillow reports binary PGM as "PPM". GIF is accepted because the Yale
# distribution ships GIF payloads under extension-less names.
SUPPORTED_FORMATS = frozenset({"PPM", "PNG", "JPEG", "GIF"})

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Image:
    """Grayscale image with intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _to_gray(im: PILImage.Image) -> np.ndarray:
    mode = im.mode
    if mode in ("1", "L"):
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    if mode in ("I", "I;16", "I;16B", "I;16L"):
        # 16-bit PGM/PNG arrive rescaled to the full 16-bit range
        return np.asarray(im, dtype=np.float64) / 65535.0
    if mode == "LA":
        return np.asarray(im.getchannel("L"), dtype=np.float64) / 255.0
    rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return rgb @ np.asarray(LUMA_WEIGHTS)


def load_image(path) -> Image:
    """Read a PGM/PNG/JPEG/GIF file as a grayscale :class:`Image`.

    Color inputs are reduced with Rec. 601 luminance weights.
    """
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            fmt = im.format
            if fmt not in SUPPORTED_FORMATS:
                raise UnsupportedFormatError(f"{path}: unsupported format {fmt!r}")
            if im.width == 0 or im.height == 0:
                raise EmptyImageError(f"{path}: zero-sized image")
            im.load()
            gray = _to_gray(im)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(f"{path}: not a recognized raster image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise UnreadableImageError(f"{path}: unreadable file ({exc})") from exc
    if gray.size == 0:
        raise EmptyImageError(f"{path}: zero-sized image")
    return Image(np.clip(gray, 0.0, 1.0))


def _resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Row-stochastic (n_out, n_in) bilinear interpolation matrix.

    Uses pixel-center alignment; when shrinking, the triangle kernel is
    widened by the scale factor so every input pixel contributes.
    """
    scale = n_in / n_out
    support = max(scale, 1.0)
    centers = (np.arange(n_out) + 0.5) * scale
    src = np.arange(n_in) + 0.5
    w = np.maximum(0.0, 1.0 - np.abs(src[None, :] - centers[:, None]) / support)
    # edge outputs can fall outside the source centers when upsampling
    empty = w.sum(axis=1) == 0
    if empty.any():
        nearest = np.clip(np.floor(centers[empty]).astype(int), 0, n_in - 1)
        w[empty, nearest] = 1.0
    return w / w.sum(axis=1, keepdims=True)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def preprocess(img: Image, side: int = 64) -> Image:
    """Center-crop to a square, resample bilinearly to ``side`` x ``side``.

    Already-conforming images are returned unchanged, which makes the
    operation idempotent.
    """
    if side <= 0:
        raise ValueError("side must be positive")
    if not _is_power_of_two(side):
        raise ValueError(f"side must be a power of two, got {side}")
    px = img.pixels
    h, w = px.shape
    if h == side and w == side:
        return img
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    square = px[top:top + s, left:left + s]
    if s != side:
        m = _resample_matrix(s, side)
        square = m @ square @ m.T
    return Image(np.clip(square, 0.0, 1.0))
