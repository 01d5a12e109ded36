"""Independent brute-force ground truth for critical-set completeness.

The sweep calls only ``transforms.apply`` (or, for the two point transforms,
a vectorized restatement of their scalar formula, asserted equivalent in the
test suite) and never touches the critical-set machinery.  A dense grid over
a continuous space refutes or corroborates completeness; it cannot prove it.
The analytic constructions carry the proof burden, this module cross-checks
them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .critical import ParamSpace
from .image import Image, digest_raw
from .transforms import CONVOLUTION_KINDS, REFLECTIONS, TransformSpec, apply

DEFAULT_STEP = 1e-4


def _scalar_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(np.floor((hi - lo) / step + 1e-12))
    grid = lo + np.arange(n + 1) * step
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    else:
        grid[-1] = hi  # land on hi exactly
    return grid


def _int_grid(lo: float, hi: float) -> list[int]:
    return list(range(int(np.ceil(lo)), int(np.floor(hi)) + 1))


def _point_transform_sweep(img: Image, kind: str, grid: np.ndarray,
                           found: dict, chunk: int = 65536) -> None:
    """Vectorized brightness/contrast sweep: same scalar formula as apply,
    evaluated for a whole parameter chunk at once."""
    flat = img.array.reshape(-1).astype(np.float64)
    W, H, C = img.width, img.height, img.channels
    for start in range(0, len(grid), chunk):
        cs = grid[start:start + chunk]
        if kind == "brightness":
            outs = np.floor(flat[None, :] + cs[:, None] + 0.5)
        else:
            outs = np.floor(cs[:, None] * flat[None, :] + 0.5)
        outs = np.clip(outs, 0, 255).astype(np.uint8)
        uniq, first = np.unique(outs, axis=0, return_index=True)
        order = np.argsort(first)
        for row_idx in first[order]:
            d = digest_raw(W, H, C, outs[row_idx].tobytes())
            if d not in found:
                found[d] = float(cs[row_idx])


def dense_sweep(img: Image, spec: TransformSpec, space: ParamSpace,
                step: float = DEFAULT_STEP) -> dict[str, object]:
    """Distinct output digests over a dense parameter grid, each mapped to
    the first (witness) parameter that produced it.

    Continuous axes are sampled at lo, lo+step, ..., plus hi exactly; integer
    and choice spaces are enumerated exhaustively and step is ignored.
    Parameters the transform rejects (e.g. even median kernels) are skipped.
    """
    found: dict[str, object] = {}
    kind = spec.kind

    def visit(c) -> None:
        try:
            out = apply(spec, img, c)
        except ValueError:
            return
        found.setdefault(out.digest(), c)

    if kind in ("brightness", "contrast") and space.kind == "real":
        grid = _scalar_grid(space.x[0], space.x[1], step)
        _point_transform_sweep(img, kind, grid, found)
        return found

    if kind == "reflection":
        choices = space.choices if space.kind == "choice" else REFLECTIONS
        for c in choices:
            visit(c)
        return found

    if space.kind == "int":
        for c in _int_grid(*space.x):
            visit(c)
        return found
    if space.kind == "real":
        for c in _scalar_grid(space.x[0], space.x[1], step):
            visit(float(c))
        return found
    if space.kind == "int_pair":
        for cx in _int_grid(*space.x):
            for cy in _int_grid(*space.y):
                visit((cx, cy))
        return found
    if space.kind == "real_pair":
        gx = _scalar_grid(space.x[0], space.x[1], step)
        gy = _scalar_grid(space.y[0], space.y[1], step)
        for cx in gx:
            for cy in gy:
                visit((float(cx), float(cy)))
        return found
    if space.kind == "product":
        grids = []
        for part_spec, part_space in zip(spec.parts, space.parts):
            sub = dense_sweep(img, part_spec, part_space, step)
            grids.append(sorted(set(sub.values()), key=repr))
        for combo in itertools.product(*grids):
            visit(tuple(combo))
        return found
    raise ValueError(f"cannot sweep space kind {space.kind!r}")


@dataclass(frozen=True)
class CoverageReport:
    """missing: sweep images the critical enumeration never produced (a
    completeness violation).  surplus: critical-enumeration images the sweep
    never reached."""
    missing: list[tuple[str, object]]
    surplus: list[tuple[str, object]]

    @property
    def complete(self) -> bool:
        return not self.missing and not self.surplus

    def to_json(self) -> dict:
        def enc(entries):
            return [{"digest": d, "witness_param": repr(p)} for d, p in entries]
        return {"complete": self.complete, "missing": enc(self.missing),
                "surplus": enc(self.surplus)}


def coverage_check(critical_outputs, sweep_outputs: dict) -> CoverageReport:
    """critical_outputs: iterable of (digest, witness param) pairs or a dict;
    sweep_outputs: the dense_sweep result for the identical configuration."""
    if isinstance(critical_outputs, dict):
        crit = dict(critical_outputs)
    else:
        crit = {}
        for d, p in critical_outputs:
            crit.setdefault(d, p)
    missing = sorted((d, p) for d, p in sweep_outputs.items() if d not in crit)
    surplus = sorted(((d, repr(p)) for d, p in crit.items()
                      if d not in sweep_outputs))
    return CoverageReport(missing=missing,
                          surplus=[(d, p) for d, p in surplus])
