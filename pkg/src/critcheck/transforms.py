"""The twelve parameterized image transformations, each exposed three ways:
forward application, per-pixel dependent coordinates, and the per-pixel value
function over those coordinates.

Transform kinds and their parameter shapes:

  avg_smooth, median_smooth, erosion, dilation   kernel size (int >= 2)
  contrast                                       gain (float >= 0)
  brightness                                     bias (float)
  occlusion                                      mask placement (int, int)
  rotation                                       angle in degrees (float)
  shear                                          (x, y) proportions (float, float)
  scale                                          (x, y) factors (float, float)
  translation                                    (dx, dy) shift (int, int)
  reflection                                     'horizontal'|'vertical'|'central'
  fog                                            smoothing kernel size (int >= 2)
  composite                                      tuple of child parameters
  plugin                                         registered by the caller

Geometric maps are forward source->destination, nearest-neighbor with ties
rounded toward +inf, uncovered destinations filled with 0, conflicts resolved
last-writer in row-major source order.  Convolutions use replicate-edge
padding; a kernel of size c covers offsets [-(c//2), c - c//2) per axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import median_low
from typing import Callable, Sequence

import numpy as np

from ._backend import box_filter, geometric_apply
from .image import Coord, Image, clamp_pixel, round_coord

CONVOLUTION_KINDS = ("avg_smooth", "median_smooth", "erosion", "dilation")
POINT_KINDS = ("contrast", "brightness")
GEOMETRIC_KINDS = ("occlusion", "rotation", "shear", "scale", "translation",
                   "reflection")
KINDS = CONVOLUTION_KINDS + POINT_KINDS + GEOMETRIC_KINDS + (
    "fog", "composite", "plugin")

REFLECTIONS = ("horizontal", "vertical", "central")
# (x sign, y sign) about the image center
_REFLECT_SIGNS = {"horizontal": (-1.0, 1.0),
                  "vertical": (1.0, -1.0),
                  "central": (-1.0, -1.0)}

_BOX_OPS = {"avg_smooth": 0, "median_smooth": 1, "erosion": 2, "dilation": 3,
            "fog": 0}

# arity and meaning of the parameter each kind takes
PARAM_META = {
    "avg_smooth": "kernel size: integer pixels in [2, min(W,H)]",
    "median_smooth": "kernel size: odd integer pixels in [3, min(W,H)]",
    "erosion": "kernel size: integer pixels in [2, min(W,H)]",
    "dilation": "kernel size: integer pixels in [2, min(W,H)]",
    "contrast": "gain: nonnegative real multiplier",
    "brightness": "bias: real added to every pixel value",
    "occlusion": "mask placement: integer (x, y) of the top-left corner",
    "rotation": "angle: degrees, about the image center",
    "shear": "(x, y) proportions: real pair",
    "scale": "(x, y) factors: real pair, origin-anchored",
    "translation": "shift: integer (dx, dy) pair",
    "reflection": "direction: horizontal | vertical | central",
    "fog": "smoothing kernel size: integer pixels in [2, min(W,H)]",
    "composite": "tuple of child parameters, applied in part order",
    "plugin": "defined by the registered plugin",
}


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    mask: Image | None = None                      # occlusion / fog
    parts: tuple["TransformSpec", ...] = field(default=())  # composite
    name: str | None = None                        # plugin

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind in ("occlusion", "fog") and self.mask is None:
            raise ValueError(f"{self.kind} requires a mask image")
        if self.kind == "composite" and len(self.parts) < 2:
            raise ValueError("composite requires at least two parts")
        if self.kind == "plugin" and not self.name:
            raise ValueError("plugin requires a registered name")

    @property
    def param_meta(self) -> str:
        return PARAM_META[self.kind]

    def describe(self) -> dict:
        """JSON-safe description; embeds mask pixels so a report alone is
        enough to regenerate every transformed image."""
        import base64
        d: dict = {"kind": self.kind}
        if self.mask is not None:
            d["mask"] = {
                "width": self.mask.width, "height": self.mask.height,
                "channels": self.mask.channels,
                "pixels": base64.b64encode(self.mask.tobytes()).decode("ascii")}
        if self.parts:
            d["parts"] = [p.describe() for p in self.parts]
        if self.name:
            d["name"] = self.name
        return d


@dataclass(frozen=True)
class Plugin:
    apply: Callable[[Image, object], Image]
    critical: Callable | None = None   # (space, dims) -> sequence of params
    dp: Callable | None = None
    df: Callable | None = None


_PLUGINS: dict[str, Plugin] = {}


def register_plugin(name: str, plugin: Plugin) -> TransformSpec:
    _PLUGINS[name] = plugin
    return TransformSpec(kind="plugin", name=name)


def get_plugin(name: str) -> Plugin:
    if name not in _PLUGINS:
        raise ValueError(f"no plugin registered under {name!r}")
    return _PLUGINS[name]


def _check_kernel(c, img_or_dims, kind: str) -> int:
    if isinstance(img_or_dims, Image):
        W, H = img_or_dims.dims
    else:
        W, H = img_or_dims
    if not float(c).is_integer():
        raise ValueError(f"kernel size must be an integer, got {c!r}")
    c = int(c)
    if c < 2 or c > min(W, H):
        raise ValueError(f"kernel size {c} outside [2, min(W,H)={min(W, H)}]")
    if kind == "median_smooth" and c % 2 == 0:
        raise ValueError(f"median kernel size must be odd, got {c}")
    return c


def _check_pair(c, kind: str, integral: bool) -> tuple:
    if not (isinstance(c, (tuple, list)) and len(c) == 2):
        raise ValueError(f"{kind} expects a parameter pair, got {c!r}")
    a, b = c
    if integral and not (float(a).is_integer() and float(b).is_integer()):
        raise ValueError(f"{kind} expects integer components, got {c!r}")
    return (int(a), int(b)) if integral else (float(a), float(b))


def _occlusion_bounds(img_dims, mask: Image) -> tuple[int, int]:
    W, H = img_dims
    if mask.width > W or mask.height > H:
        raise ValueError("occlusion mask larger than the image")
    return W - mask.width, H - mask.height


def _geometry_coeffs(kind: str, dims: tuple[int, int], c):
    """(a11, a12, a21, a22, cx, cy, bx, by) for the shared forward-map kernel."""
    W, H = dims
    if kind == "rotation":
        cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
        th = math.radians(float(c))
        ct, st = math.cos(th), math.sin(th)
        return ct, -st, st, ct, cx, cy, cx, cy
    if kind == "shear":
        cw, ch = _check_pair(c, kind, integral=False)
        return 1.0, cw, ch, 1.0, 0.0, 0.0, 0.0, 0.0
    if kind == "scale":
        cw, ch = _check_pair(c, kind, integral=False)
        return cw, 0.0, 0.0, ch, 0.0, 0.0, 0.0, 0.0
    if kind == "translation":
        dx, dy = _check_pair(c, kind, integral=True)
        return 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, float(dx), float(dy)
    if kind == "reflection":
        if c not in REFLECTIONS:
            raise ValueError(f"reflection direction must be one of {REFLECTIONS}")
        sx, sy = _REFLECT_SIGNS[c]
        cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
        return sx, 0.0, 0.0, sy, cx, cy, cx, cy
    raise ValueError(f"{kind} is not a coordinate-mapping transform")


def map_coord(kind: str, dims: tuple[int, int], coord: Coord, c) -> Coord:
    """Destination cell of one source coordinate (may be out of bounds)."""
    a11, a12, a21, a22, cx, cy, bx, by = _geometry_coeffs(kind, dims, c)
    u = coord.i - cx
    v = coord.j - cy
    return round_coord(a11 * u + a12 * v + bx, a21 * u + a22 * v + by)


def apply(spec: TransformSpec, img: Image, c) -> Image:
    """T(img; c).  Output has the input's dimensions and channels."""
    kind = spec.kind
    if kind in CONVOLUTION_KINDS:
        k = _check_kernel(c, img, kind)
        return Image(box_filter(img.array, k, _BOX_OPS[kind]))
    if kind == "contrast":
        gain = float(c)
        if gain < 0:
            raise ValueError("contrast gain must be nonnegative")
        arr = np.floor(gain * img.array.astype(np.float64) + 0.5)
        return Image(np.clip(arr, 0, 255).astype(np.uint8))
    if kind == "brightness":
        arr = np.floor(img.array.astype(np.float64) + float(c) + 0.5)
        return Image(np.clip(arr, 0, 255).astype(np.uint8))
    if kind == "occlusion":
        cw, ch = _check_pair(c, kind, integral=True)
        max_x, max_y = _occlusion_bounds(img.dims, spec.mask)
        if not (0 <= cw <= max_x and 0 <= ch <= max_y):
            raise ValueError(
                f"occlusion placement {c!r} outside [0,{max_x}]x[0,{max_y}]")
        out = img.array.copy()
        mask = spec.mask.array
        if mask.shape[2] != out.shape[2]:
            if mask.shape[2] != 1:
                raise ValueError(
                    "occlusion mask channels incompatible with the image "
                    "(color conversion is out of scope)")
            mask = np.repeat(mask, out.shape[2], axis=2)
        out[ch:ch + spec.mask.height, cw:cw + spec.mask.width] = mask
        return Image(out)
    if kind in GEOMETRIC_KINDS:
        coeffs = _geometry_coeffs(kind, img.dims, c)
        return Image(geometric_apply(img.array, *coeffs))
    if kind == "fog":
        return apply_fog(img, spec.mask, c)
    if kind == "composite":
        if len(c) != len(spec.parts):
            raise ValueError("composite parameter arity mismatch")
        out = img
        for part, pc in zip(spec.parts, c):
            out = apply(part, out, pc)
        return out
    if kind == "plugin":
        return get_plugin(spec.name).apply(img, c)
    raise AssertionError(kind)


def apply_fog(img: Image, mask: Image, c) -> Image:
    """Smooth the fog mask with a c-by-c box filter, then blend:
    out = clamp((img + smoothed_mask) / 2) per pixel."""
    if mask.dims != img.dims:
        raise ValueError("fog mask dimensions must match the image")
    k = _check_kernel(c, img, "fog")
    m = mask.array
    if m.shape[2] != img.channels:
        if m.shape[2] == 1:
            m = np.repeat(m, img.channels, axis=2)
        else:
            raise ValueError("fog mask channels incompatible with image")
    smoothed = box_filter(np.ascontiguousarray(m), k, 0)
    total = img.array.astype(np.uint16) + smoothed.astype(np.uint16)
    return Image(((total + 1) // 2).astype(np.uint8))


def dependent_pixels(spec: TransformSpec, dims: tuple[int, int],
                     coord: Coord, c) -> list[Coord]:
    """Coordinates the output pixel(s) tied to `coord` draw from / land on.

    Convolutions return the c-by-c window around `coord` with out-of-window
    coordinates clamped to the border (replicate padding), duplicates kept so
    the value function sees the same multiset the stencil uses.  Point
    transforms return [coord].  Geometric transforms return the single
    mapped-and-rounded destination, dropped if out of bounds.
    """
    W, H = dims
    coord = Coord(*coord)
    if not (0 <= coord.i < W and 0 <= coord.j < H):
        raise ValueError(f"coordinate {coord} out of bounds for {dims}")
    kind = spec.kind
    if kind in CONVOLUTION_KINDS or kind == "fog":
        k = _check_kernel(c, dims, kind)
        lo, hi = -(k // 2), k - k // 2
        out = []
        for dj in range(lo, hi):
            jj = min(max(coord.j + dj, 0), H - 1)
            for di in range(lo, hi):
                out.append(Coord(min(max(coord.i + di, 0), W - 1), jj))
        return out
    if kind in POINT_KINDS:
        return [coord]
    if kind == "occlusion":
        cw, ch = _check_pair(c, kind, integral=True)
        max_x, max_y = _occlusion_bounds(dims, spec.mask)
        if not (0 <= cw <= max_x and 0 <= ch <= max_y):
            raise ValueError(
                f"occlusion placement {c!r} outside [0,{max_x}]x[0,{max_y}]")
        inside = (cw <= coord.i < cw + spec.mask.width
                  and ch <= coord.j < ch + spec.mask.height)
        return [] if inside else [coord]
    if kind in GEOMETRIC_KINDS:
        dest = map_coord(kind, dims, coord, c)
        if 0 <= dest.i < W and 0 <= dest.j < H:
            return [dest]
        return []
    if kind == "plugin":
        plugin = get_plugin(spec.name)
        if plugin.dp is None:
            raise ValueError(f"plugin {spec.name!r} exposes no dependent-pixel map")
        return plugin.dp(dims, coord, c)
    raise ValueError(f"dependent pixels undefined for kind {kind!r}")


def dependence_function(spec: TransformSpec, values: Sequence[int], c) -> int:
    """Output pixel value from the values at the dependent coordinates."""
    if len(values) == 0:
        raise ValueError("values must be nonempty")
    kind = spec.kind
    if kind in CONVOLUTION_KINDS:
        n = len(values)
        if kind == "avg_smooth":
            return (2 * sum(values) + n) // (2 * n)
        if kind == "median_smooth":
            return median_low(values)
        if kind == "erosion":
            return min(values)
        return max(values)
    if len(values) != 1:
        raise ValueError(f"{kind} takes exactly one input value")
    v = values[0]
    if kind == "contrast":
        return clamp_pixel(float(c) * v)
    if kind == "brightness":
        return clamp_pixel(float(c) + v)
    if kind in GEOMETRIC_KINDS:
        return v
    if kind == "plugin":
        plugin = get_plugin(spec.name)
        if plugin.df is None:
            raise ValueError(f"plugin {spec.name!r} exposes no value function")
        return plugin.df(values, c)
    raise ValueError(f"dependence function undefined for kind {kind!r}")
