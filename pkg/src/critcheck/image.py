"""Raster images, coordinate rounding, and pixel clamping.

Conventions shared by every other module:
  * a coordinate <i, j> is (column, row); arrays are indexed [j, i, channel]
  * fractional coordinates round to the nearest integer, ties toward +inf
  * pixel values are uint8; intermediate math is double precision
"""
from __future__ import annotations

import hashlib
import math
import struct
from typing import NamedTuple

import numpy as np


class Coord(NamedTuple):
    i: int
    j: int


class Image:
    """Immutable uint8 raster, 1 or 3 channels, row-major channel-interleaved."""

    __slots__ = ("_arr", "_digest")

    def __init__(self, pixels: np.ndarray):
        arr = np.asarray(pixels)
        if arr.dtype != np.uint8:
            raise ValueError("pixel array must be uint8")
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError("expected shape (H, W) or (H, W, C) with C in {1, 3}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have positive dimensions")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._arr = arr
        self._digest: str | None = None

    @classmethod
    def zeros(cls, width: int, height: int, channels: int = 1) -> "Image":
        return cls(np.zeros((height, width, channels), dtype=np.uint8))

    @property
    def array(self) -> np.ndarray:
        """Read-only (H, W, C) view."""
        return self._arr

    @property
    def width(self) -> int:
        return self._arr.shape[1]

    @property
    def height(self) -> int:
        return self._arr.shape[0]

    @property
    def channels(self) -> int:
        return self._arr.shape[2]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.width, self.height)

    def tobytes(self) -> bytes:
        return self._arr.tobytes()

    def digest(self) -> str:
        if self._digest is None:
            self._digest = image_digest(self)
        return self._digest

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return (self._arr.shape == other._arr.shape
                and np.array_equal(self._arr, other._arr))

    def __hash__(self) -> int:
        return hash((self._arr.shape, self.tobytes()))

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height}x{self.channels})"


def round_coord(x: float, y: float) -> Coord:
    """Round each component to the nearest integer, ties toward +inf.

    Out-of-bounds results are legal; callers do their own bounds checks.
    """
    return Coord(int(math.floor(x + 0.5)), int(math.floor(y + 0.5)))


def clamp_pixel(v: float) -> int:
    """Round half-up, then clamp into [0, 255]."""
    return min(255, max(0, int(math.floor(v + 0.5))))


def image_digest(img: Image) -> str:
    """Content digest over (W, H, channels, pixels); equal images hash equal."""
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<III", img.width, img.height, img.channels))
    h.update(img.tobytes())
    return h.hexdigest()


def digest_raw(width: int, height: int, channels: int, data: bytes) -> str:
    """Same digest as image_digest without constructing an Image."""
    h = hashlib.blake2b(digest_size=16)
    h.update(struct.pack("<III", width, height, channels))
    h.update(data)
    return h.hexdigest()


def read_png(path) -> Image:
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        if im.mode not in ("L", "RGB"):
            raise ValueError(
                f"unsupported PNG mode {im.mode!r}: only 8-bit grayscale (L) "
                "and 8-bit RGB are accepted")
        arr = np.asarray(im, dtype=np.uint8)
    return Image(arr)


def write_png(img: Image, path) -> None:
    from PIL import Image as PILImage

    arr = img.array
    if img.channels == 1:
        PILImage.fromarray(arr[:, :, 0], mode="L").save(path, format="PNG")
    else:
        PILImage.fromarray(arr, mode="RGB").save(path, format="PNG")
