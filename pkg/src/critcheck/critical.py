"""Critical parameter sets: the finite sequences that stand in for a
transform's continuous parameter space.

Two parameter lists live side by side in every CriticalParamSet:

  values       the critical parameter values proper: every parameter at which
               the output image changes, plus the space endpoints.  This is
               the set whose size is reported and exported.

  eval_params  the representatives actually evaluated when enumerating
               distinct outputs: for continuous geometric parameters these
               are the midpoints between consecutive critical values (plus
               endpoints), so every constancy interval is sampled in its
               interior.  For discrete and fraction-valued families the two
               lists coincide.

Exactly at a critical value the rounded coordinates of different pixels can
flip in opposite directions (ties round toward +inf), so the image at that
single point may briefly mix the two neighboring images.  Interior
representatives sidestep that measure-zero state; the trade-off is recorded
in the package docs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .image import Coord
from .transforms import (CONVOLUTION_KINDS, REFLECTIONS, TransformSpec,
                         get_plugin, map_coord)

_ANGLE_MERGE_TOL = 1e-9  # degrees; collapses duplicate solutions of one crossing


# ---------------------------------------------------------------------------
# parameter spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpace:
    """Bounds for one transform parameter.

    kind: "int" | "real" scalar intervals, "int_pair" | "real_pair" per-axis
    intervals, "choice" for the reflection directions, "product" for
    composite transforms.
    """
    kind: str
    x: tuple[float, float] | None = None
    y: tuple[float, float] | None = None
    choices: tuple[str, ...] | None = None
    parts: tuple["ParamSpace", ...] = ()

    def __post_init__(self):
        if self.kind in ("int", "real", "int_pair", "real_pair"):
            if self.x is None or self.x[0] > self.x[1]:
                raise ValueError(f"invalid bounds {self.x!r}")
            if self.kind.endswith("_pair"):
                if self.y is None or self.y[0] > self.y[1]:
                    raise ValueError(f"invalid bounds {self.y!r}")
            if self.kind.startswith("int"):
                for b in (self.x or ()) + (self.y or ()):
                    if not float(b).is_integer():
                        raise ValueError("integer space with non-integer endpoint")
        elif self.kind == "choice":
            if not self.choices:
                raise ValueError("choice space needs at least one choice")
        elif self.kind == "product":
            if len(self.parts) < 2:
                raise ValueError("product space needs at least two parts")
        else:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @classmethod
    def integers(cls, lo, hi) -> "ParamSpace":
        return cls("int", x=(int(lo), int(hi)))

    @classmethod
    def reals(cls, lo, hi) -> "ParamSpace":
        return cls("real", x=(float(lo), float(hi)))

    @classmethod
    def integer_pairs(cls, xlo, xhi, ylo, yhi) -> "ParamSpace":
        return cls("int_pair", x=(int(xlo), int(xhi)), y=(int(ylo), int(yhi)))

    @classmethod
    def real_pairs(cls, xlo, xhi, ylo, yhi) -> "ParamSpace":
        return cls("real_pair", x=(float(xlo), float(xhi)),
                   y=(float(ylo), float(yhi)))

    @classmethod
    def of_choices(cls, *choices: str) -> "ParamSpace":
        return cls("choice", choices=tuple(choices))

    @classmethod
    def product(cls, *parts: "ParamSpace") -> "ParamSpace":
        return cls("product", parts=tuple(parts))

    def to_json(self) -> dict:
        if self.kind in ("int", "real"):
            return {"kind": self.kind, "lo": self.x[0], "hi": self.x[1]}
        if self.kind.endswith("_pair"):
            return {"kind": self.kind, "x": list(self.x), "y": list(self.y)}
        if self.kind == "choice":
            return {"kind": "choice", "choices": list(self.choices)}
        return {"kind": "product", "parts": [p.to_json() for p in self.parts]}

    @classmethod
    def from_json(cls, d: dict) -> "ParamSpace":
        kind = d["kind"]
        if kind in ("int", "real"):
            return cls(kind, x=(d["lo"], d["hi"]))
        if kind.endswith("_pair"):
            return cls(kind, x=tuple(d["x"]), y=tuple(d["y"]))
        if kind == "choice":
            return cls(kind, choices=tuple(d["choices"]))
        return cls(kind, parts=tuple(cls.from_json(p) for p in d["parts"]))


class ProductSeq(Sequence):
    """Lazy lexicographic Cartesian product of per-part sequences."""

    def __init__(self, parts: Sequence[Sequence]):
        self._parts = [list(p) if not isinstance(p, (list, tuple, ProductSeq))
                       else p for p in parts]
        n = 1
        for p in self._parts:
            n *= len(p)
        self._len = n

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, idx: int):
        if isinstance(idx, slice):
            return [self[k] for k in range(*idx.indices(self._len))]
        if idx < 0:
            idx += self._len
        if not 0 <= idx < self._len:
            raise IndexError(idx)
        out = []
        for p in reversed(self._parts):
            idx, r = divmod(idx, len(p))
            out.append(p[r])
        return tuple(reversed(out))

    def __iter__(self) -> Iterator[tuple]:
        import itertools
        return itertools.product(*self._parts)


@dataclass(frozen=True)
class CriticalParamSet:
    """Finite stand-in for a transform's parameter space at fixed dimensions."""
    kind: str
    space: ParamSpace
    dims: tuple[int, int]
    values: Sequence
    eval_params: Sequence

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self, max_values: int = 10_000_000) -> dict:
        if len(self.values) > max_values:
            raise ValueError(
                f"{len(self.values)} values exceed the export cap {max_values}")
        return {
            "transform": self.kind,
            "space": self.space.to_json(),
            "dims": list(self.dims),
            "values": [_param_json(v) for v in self.values],
            "eval_params": [_param_json(v) for v in self.eval_params],
        }

    def dump(self, fp) -> None:
        json.dump(self.to_json(), fp, separators=(",", ":"))


def _param_json(v):
    if isinstance(v, tuple):
        return [_param_json(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


# ---------------------------------------------------------------------------
# per-family constructions
# ---------------------------------------------------------------------------

def _int_range(space: ParamSpace | None, lo_default, hi_default):
    if space is None:
        return lo_default, hi_default
    if space.kind not in ("int", "real"):
        raise ValueError(f"expected a scalar space, got {space.kind}")
    return (max(lo_default, math.ceil(space.x[0])),
            min(hi_default, math.floor(space.x[1])))


def _kernel_values(kind: str, space: ParamSpace | None, dims) -> list[int]:
    lo, hi = _int_range(space, 2, min(dims))
    vals = [c for c in range(max(lo, 2), hi + 1)
            if kind != "median_smooth" or c % 2 == 1]
    if not vals:
        raise ValueError(
            f"no valid kernel sizes for {kind} in the given space at dims {dims}")
    return vals


def _contrast_values(space: ParamSpace) -> list[float]:
    if space.kind != "real" or space.x[0] < 0:
        raise ValueError("contrast space must be a real interval with lo >= 0")
    lo, hi = Fraction(space.x[0]), Fraction(space.x[1])
    seen: set[Fraction] = set()
    for n in range(1, 256):
        m_lo = max(0, math.ceil(lo * n))
        m_hi = min(255, math.floor(hi * n))
        for m in range(m_lo, m_hi + 1):
            seen.add(Fraction(m, n))
    vals = sorted(float(f) for f in seen)
    return _merge_sorted(vals, [space.x[0], space.x[1]])


def _brightness_values(space: ParamSpace | None) -> list[float]:
    if space is None:
        space = ParamSpace.integers(-255, 255)
    lo = max(space.x[0], -255)
    hi = min(space.x[1], 255)
    if lo > hi:
        raise ValueError("brightness space excludes every effective bias")
    vals = [float(c) for c in range(math.ceil(lo), math.floor(hi) + 1)]
    return _merge_sorted(vals, [float(space.x[0]), float(space.x[1])])


def _merge_sorted(vals: list[float], extra: list[float]) -> list[float]:
    out = sorted(set(vals) | set(extra))
    return out


def _axis_int_values(bounds: tuple[float, float]) -> list[int]:
    lo, hi = math.ceil(bounds[0]), math.floor(bounds[1])
    if lo > hi:
        raise ValueError(f"empty integer axis {bounds!r}")
    return list(range(lo, hi + 1))


def _midpoints(lo: float, hi: float, changes: Sequence[float]) -> list[float]:
    fence = [lo, *changes, hi]
    mids = [(a + b) / 2.0 for a, b in zip(fence, fence[1:]) if a < b]
    return sorted({lo, hi, *mids})


def rotation_change_angles(W: int, H: int, lo_deg: float, hi_deg: float,
                           merge_tol: float = _ANGLE_MERGE_TOL) -> np.ndarray:
    """All angles in [lo, hi] degrees at which some pixel's rounded
    destination changes visibly (entering, leaving, or moving within the
    canvas).  Rotation is about the image center ((W-1)/2, (H-1)/2).
    """
    if hi_deg - lo_deg > 360.0 + 1e-12:
        raise ValueError("rotation windows wider than 360 degrees are not supported")
    if lo_deg >= hi_deg:
        return np.empty(0)
    cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
    lo, hi = math.radians(lo_deg), math.radians(hi_deg)
    ii, jj = np.meshgrid(np.arange(W, dtype=np.float64),
                         np.arange(H, dtype=np.float64), indexing="ij")
    u = (ii - cx).ravel()
    v = (jj - cy).ravel()
    r = np.hypot(u, v)
    keep = r > 0
    u, v, r = u[keep], v[keep], r[keep]
    alpha = np.arctan2(v, u)
    two_pi = 2 * math.pi
    found: list[np.ndarray] = []

    for axis in ("x", "y"):
        dimc, dimo = (W, H) if axis == "x" else (H, W)
        cc, co = (cx, cy) if axis == "x" else (cy, cx)
        ang0, ang1 = alpha + lo, alpha + hi
        if axis == "x":
            f0, f1 = r * np.cos(ang0), r * np.cos(ang1)
            tp_first = np.pi * np.ceil(ang0 / np.pi)
        else:
            f0, f1 = r * np.sin(ang0), r * np.sin(ang1)
            tp_first = np.pi * np.ceil((ang0 - np.pi / 2) / np.pi) + np.pi / 2
        fmin, fmax = np.minimum(f0, f1), np.maximum(f0, f1)
        for shift in (0.0, np.pi):  # up to two turning points inside the window
            tp = tp_first + shift
            inside = tp <= ang1
            tv = r * (np.cos(tp) if axis == "x" else np.sin(tp))
            fmin = np.where(inside, np.minimum(fmin, tv), fmin)
            fmax = np.where(inside, np.maximum(fmax, tv), fmax)
        kmin = np.maximum(np.ceil(fmin + cc - 0.5).astype(np.int64), -1)
        kmax = np.minimum(np.floor(fmax + cc - 0.5).astype(np.int64), dimc - 1)
        nk = np.maximum(kmax - kmin + 1, 0)
        total = int(nk.max()) if nk.size else 0
        if total <= 0:
            continue
        offs = np.arange(total)
        K = kmin[:, None] + offs[None, :]
        in_use = offs[None, :] < nk[:, None]
        B = K + 0.5 - cc
        R = np.broadcast_to(r[:, None], B.shape)
        A = np.broadcast_to(alpha[:, None], B.shape)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(in_use, B / R, 2.0)
        ok = in_use & (np.abs(ratio) < 1.0)  # tangencies excluded
        ratio = np.where(ok, ratio, 0.0)
        if axis == "x":
            base = np.arccos(ratio)
            branches = (base - A, -base - A)
        else:
            base = np.arcsin(ratio)
            branches = (base - A, (np.pi - base) - A)
        for cand in branches:
            first = cand - two_pi * np.floor((cand - lo) / two_pi)
            for t in (first, first + two_pi):
                sel = ok & (t >= lo) & (t <= hi)
                ang = A + t
                other = R * (np.sin(ang) if axis == "x" else np.cos(ang)) + co
                od = np.floor(other + 0.5)
                sel &= (od >= 0) & (od <= dimo - 1)
                found.append(t[sel].ravel())
    if not found:
        return np.empty(0)
    angles = np.sort(np.rad2deg(np.concatenate(found)))
    if angles.size == 0:
        return angles
    keep_mask = np.empty(angles.size, dtype=bool)
    keep_mask[0] = True
    keep_mask[1:] = np.diff(angles) > merge_tol
    return angles[keep_mask]


def shear_axis_changes(movement_dim: int, other_dim: int,
                       bounds: tuple[float, float]) -> list[float]:
    """Parameters where round(i + j*c) changes for some pixel: (m + 0.5)/j for
    j in [1, other_dim), m + 0.5 in [-movement_dim + 0.5, movement_dim - 0.5]."""
    lo, hi = bounds
    seen: set[Fraction] = set()
    for j in range(1, other_dim):
        m_lo = max(-movement_dim, math.ceil(lo * j - 0.5))
        m_hi = min(movement_dim - 1, math.floor(hi * j - 0.5))
        for m in range(m_lo, m_hi + 1):
            seen.add(Fraction(2 * m + 1, 2 * j))
    return sorted(float(f) for f in seen)


def scale_axis_changes(dim: int, bounds: tuple[float, float]) -> list[float]:
    """Parameters where round(i*c) changes: (k + 0.5)/i for i in [1, dim),
    k in [-1, dim - 1]."""
    lo, hi = bounds
    seen: set[Fraction] = set()
    for i in range(1, dim):
        k_lo = max(-1, math.ceil(lo * i - 0.5))
        k_hi = min(dim - 1, math.floor(hi * i - 0.5))
        for k in range(k_lo, k_hi + 1):
            seen.add(Fraction(2 * k + 1, 2 * i))
    return sorted(float(f) for f in seen)


def _continuous_axis(changes: Sequence[float],
                     bounds: tuple[float, float]) -> tuple[list, list]:
    lo, hi = float(bounds[0]), float(bounds[1])
    inner = [c for c in changes if lo <= c <= hi]
    values = sorted({lo, hi, *inner})
    return values, _midpoints(lo, hi, inner)


def critical_params(spec: TransformSpec, space: ParamSpace | None,
                    dims: tuple[int, int]) -> CriticalParamSet:
    """The critical parameter set of `spec` over `space` at image size `dims`.

    Depends only on dimensions, never on pixel content.
    """
    W, H = dims
    if W < 1 or H < 1:
        raise ValueError("dims must be positive")
    kind = spec.kind

    if kind in CONVOLUTION_KINDS or kind == "fog":
        vals = _kernel_values(kind, space, dims)
        space = space or ParamSpace.integers(2, min(dims))
        return CriticalParamSet(kind, space, dims, vals, vals)

    if kind == "contrast":
        if space is None:
            raise ValueError("contrast requires an explicit parameter space")
        vals = _contrast_values(space)
        return CriticalParamSet(kind, space, dims, vals, vals)

    if kind == "brightness":
        vals = _brightness_values(space)
        space = space or ParamSpace.integers(-255, 255)
        return CriticalParamSet(kind, space, dims, vals, vals)

    if kind == "occlusion":
        max_x = W - spec.mask.width
        max_y = H - spec.mask.height
        if max_x < 0 or max_y < 0:
            raise ValueError("occlusion mask larger than the image")
        if space is None:
            space = ParamSpace.integer_pairs(0, max_x, 0, max_y)
        xs = [x for x in _axis_int_values(space.x) if 0 <= x <= max_x]
        ys = [y for y in _axis_int_values(space.y) if 0 <= y <= max_y]
        if not xs or not ys:
            raise ValueError("occlusion space excludes every placement")
        prod = ProductSeq([xs, ys])
        return CriticalParamSet(kind, space, dims, prod, prod)

    if kind == "rotation":
        if space is None:
            raise ValueError("rotation requires an explicit parameter space")
        lo, hi = float(space.x[0]), float(space.x[1])
        changes = rotation_change_angles(W, H, lo, hi).tolist()
        values = sorted({lo, hi, *changes})
        evals = _midpoints(lo, hi, changes)
        return CriticalParamSet(kind, space, dims, values, evals)

    if kind in ("shear", "scale"):
        if space is None:
            raise ValueError(f"{kind} requires an explicit parameter space")
        if space.kind != "real_pair":
            raise ValueError(f"{kind} expects a real_pair space")
        if kind == "shear":
            cx = shear_axis_changes(W, H, space.x)
            cy = shear_axis_changes(H, W, space.y)
        else:
            cx = scale_axis_changes(W, space.x)
            cy = scale_axis_changes(H, space.y)
        vx, ex = _continuous_axis(cx, space.x)
        vy, ey = _continuous_axis(cy, space.y)
        return CriticalParamSet(kind, space, dims,
                                ProductSeq([vx, vy]), ProductSeq([ex, ey]))

    if kind == "translation":
        if space is None:
            space = ParamSpace.integer_pairs(-(W - 1), W - 1, -(H - 1), H - 1)
        xs = _axis_int_values(space.x)
        ys = _axis_int_values(space.y)
        prod = ProductSeq([xs, ys])
        return CriticalParamSet(kind, space, dims, prod, prod)

    if kind == "reflection":
        if space is None:
            space = ParamSpace.of_choices(*REFLECTIONS)
        vals = [d for d in REFLECTIONS if d in space.choices]
        if not vals:
            raise ValueError("reflection space excludes every direction")
        return CriticalParamSet(kind, space, dims, vals, vals)

    if kind == "composite":
        if space is None or space.kind != "product" \
                or len(space.parts) != len(spec.parts):
            raise ValueError("composite requires a matching product space")
        children = [critical_params(p, s, dims)
                    for p, s in zip(spec.parts, space.parts)]
        return compose(children)

    if kind == "plugin":
        plugin = get_plugin(spec.name)
        if plugin.critical is None:
            raise ValueError(f"plugin {spec.name!r} has no critical-set builder")
        vals = list(plugin.critical(space, dims))
        if not vals:
            raise ValueError(f"plugin {spec.name!r} produced an empty critical set")
        return CriticalParamSet(kind, space, dims, vals, vals)

    raise ValueError(f"critical set undefined for kind {kind!r}")


def compose(sets: Sequence[CriticalParamSet]) -> CriticalParamSet:
    """Cartesian product of critical sets, lexicographically ordered; the
    size is exactly the product of the component sizes."""
    if len(sets) < 2:
        raise ValueError("compose needs at least two critical sets")
    dims = sets[0].dims
    for s in sets:
        if len(s.values) == 0:
            raise ValueError("cannot compose an empty critical set")
        if s.dims != dims:
            raise ValueError("cannot compose critical sets across dimensions")
    space = ParamSpace.product(*(s.space for s in sets))
    return CriticalParamSet(
        kind="composite", space=space, dims=dims,
        values=ProductSeq([s.values for s in sets]),
        eval_params=ProductSeq([s.eval_params for s in sets]))


# ---------------------------------------------------------------------------
# inverses
# ---------------------------------------------------------------------------

def _single_coord_rotation_candidates(W, H, coord: Coord, lo, hi) -> list[float]:
    cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
    u, v = coord.i - cx, coord.j - cy
    r = math.hypot(u, v)
    if r == 0 or lo >= hi:
        return [lo]
    alpha = math.atan2(v, u)
    lo_r, hi_r = math.radians(lo), math.radians(hi)
    sols: list[float] = []
    for axis in ("x", "y"):
        cc = cx if axis == "x" else cy
        dimc = W if axis == "x" else H
        for k in range(-1, dimc):
            b = k + 0.5 - cc
            if abs(b) >= r:
                continue
            if axis == "x":
                base = math.acos(b / r)
                cands = (base - alpha, -base - alpha)
            else:
                base = math.asin(b / r)
                cands = (base - alpha, math.pi - base - alpha)
            for cand in cands:
                first = cand - 2 * math.pi * math.floor((cand - lo_r) / (2 * math.pi))
                for t in (first, first + 2 * math.pi):
                    if lo_r <= t <= hi_r:
                        sols.append(math.degrees(t))
    changes = sorted(set(sols))
    fence = [lo, *changes, hi]
    mids = [(a + b) / 2 for a, b in zip(fence, fence[1:]) if a < b]
    return sorted({lo, hi, *changes, *mids})


def _axis_interval_start(src: int, target: int, bounds,
                         other: int | None = None) -> float | None:
    """Minimal c in bounds with round(src*c) == target (scale form) or
    round(src + other*c) == target (shear form, when `other` is given)."""
    lo, hi = float(bounds[0]), float(bounds[1])

    def dest(c: float) -> int:
        x = src * c if other is None else src + other * c
        return math.floor(x + 0.5)

    denom = src if other is None else other
    if denom == 0:
        return lo if dest(lo) == target else None
    base = 0.0 if other is None else float(src)
    ends = sorted(((target - 0.5 - base) / denom,
                   (target + 0.5 - base) / denom))
    start = max(ends[0], lo)
    # the feasible interval is half-open on one side; verify and nudge by ulps
    for c in (start, math.nextafter(start, math.inf),
              math.nextafter(start, -math.inf)):
        if lo <= c <= hi and c <= ends[1] and dest(c) == target:
            return c
    return None


def invert_dp(spec: TransformSpec, dims: tuple[int, int], coord: Coord,
              target: Coord, space: ParamSpace | None = None):
    """One parameter (the minimal feasible one) mapping `coord` onto `target`
    under the transform's coordinate map, or None when no parameter does."""
    W, H = dims
    coord, target = Coord(*coord), Coord(*target)
    kind = spec.kind
    if kind in CONVOLUTION_KINDS or kind == "fog":
        di, dj = target.i - coord.i, target.j - coord.j
        need = max(2 * di + 1 if di >= 0 else -2 * di,
                   2 * dj + 1 if dj >= 0 else -2 * dj, 2)
        if kind == "median_smooth" and need % 2 == 0:
            need += 1
        lo, hi = _int_range(space, 2, min(dims))
        c = max(need, lo)
        if kind == "median_smooth" and c % 2 == 0:
            c += 1
        return c if c <= hi else None
    if kind in ("contrast", "brightness"):
        if target != coord:
            return None
        return float(space.x[0]) if space is not None else \
            (1.0 if kind == "contrast" else 0.0)
    if kind == "occlusion":
        if target != coord:
            return None
        max_x = W - spec.mask.width
        max_y = H - spec.mask.height
        for cw in range(0, max_x + 1):
            for ch in range(0, max_y + 1):
                inside = (cw <= coord.i < cw + spec.mask.width
                          and ch <= coord.j < ch + spec.mask.height)
                if not inside:
                    return (cw, ch)
        return None
    if kind == "translation":
        c = (target.i - coord.i, target.j - coord.j)
        if space is not None:
            if not (space.x[0] <= c[0] <= space.x[1]
                    and space.y[0] <= c[1] <= space.y[1]):
                return None
        return c
    if kind == "reflection":
        for d in REFLECTIONS:
            if space is not None and d not in (space.choices or REFLECTIONS):
                continue
            if map_coord("reflection", dims, coord, d) == target:
                return d
        return None
    if kind == "rotation":
        lo, hi = (space.x if space is not None else (0.0, 360.0))
        for c in _single_coord_rotation_candidates(W, H, coord, float(lo), float(hi)):
            if map_coord("rotation", dims, coord, c) == target:
                return c
        return None
    if kind == "scale":
        bx = space.x if space is not None else (-float(dims[0]), float(dims[0]))
        by = space.y if space is not None else (-float(dims[1]), float(dims[1]))
        cw = _axis_interval_start(coord.i, target.i, bx)
        ch = _axis_interval_start(coord.j, target.j, by)
        if cw is None or ch is None:
            return None
        return (cw, ch)
    if kind == "shear":
        bx = space.x if space is not None else (-float(dims[0]), float(dims[0]))
        by = space.y if space is not None else (-float(dims[1]), float(dims[1]))
        cw = _axis_interval_start(coord.i, target.i, bx, other=coord.j)
        ch = _axis_interval_start(coord.j, target.j, by, other=coord.i)
        if cw is None or ch is None:
            return None
        return (cw, ch)
    raise ValueError(f"invert_dp undefined for kind {kind!r}")


def invert_df(spec: TransformSpec, values: Sequence[int], target: int,
              space: ParamSpace | None = None):
    """Minimal parameter mapping the input values onto `target` under the
    transform's value function, or None when infeasible."""
    kind = spec.kind
    if kind == "brightness":
        if len(values) != 1:
            raise ValueError("brightness takes one input value")
        return float(target - values[0])
    if kind == "contrast":
        if len(values) != 1:
            raise ValueError("contrast takes one input value")
        v = values[0]
        if v == 0:
            if target != 0:
                return None
            return float(space.x[0]) if space is not None else 0.0
        return target / v
    if kind in CONVOLUTION_KINDS:
        from .transforms import dependence_function
        n = len(values)
        k = math.isqrt(n)
        if k * k != n or dependence_function(spec, values, k) != target:
            return None
        return k
    if kind in ("occlusion", "rotation", "shear", "scale", "translation",
                "reflection"):
        if len(values) != 1 or values[0] != target:
            return None
        if space is not None:
            if space.kind == "choice":
                return space.choices[0]
            if space.kind.endswith("_pair"):
                return (space.x[0], space.y[0])
            return float(space.x[0])
        return REFLECTIONS[0] if kind == "reflection" else 0.0
    raise ValueError(f"invert_df undefined for kind {kind!r}")


# ---------------------------------------------------------------------------
# complexity
# ---------------------------------------------------------------------------

_COMPLEXITY = {
    "avg_smooth": "O(n)", "median_smooth": "O(n)", "erosion": "O(n)",
    "dilation": "O(n)", "fog": "O(n)",
    "contrast": "O(1)", "brightness": "O(1)", "reflection": "O(1)",
    "occlusion": "O(n)", "translation": "O(n)",
    "rotation": "O(n^2)", "scale": "O(n^2)", "shear": "O(n^3)",
}


def count_bound(spec: TransformSpec, space: ParamSpace | None,
                dims: tuple[int, int]) -> tuple[str, int]:
    """Asymptotic class (in n = W*H) and the exact enumerated size of the
    critical set for the configured space, computed without materializing
    pair products."""
    kind = spec.kind
    W, H = dims
    if kind in ("shear", "scale"):
        if space is None:
            raise ValueError(f"{kind} requires an explicit parameter space")
        if kind == "shear":
            cx = shear_axis_changes(W, H, space.x)
            cy = shear_axis_changes(H, W, space.y)
        else:
            cx = scale_axis_changes(W, space.x)
            cy = scale_axis_changes(H, space.y)
        nx = len(_continuous_axis(cx, space.x)[0])
        ny = len(_continuous_axis(cy, space.y)[0])
        return _COMPLEXITY[kind], nx * ny
    if kind == "composite":
        if space is None or space.kind != "product":
            raise ValueError("composite requires a product space")
        total = 1
        for part, s in zip(spec.parts, space.parts):
            total *= count_bound(part, s, dims)[1]
        return "product", total
    if kind == "plugin":
        return "unknown", len(critical_params(spec, space, dims).values)
    tag = _COMPLEXITY[kind]
    return tag, len(critical_params(spec, space, dims).values)
