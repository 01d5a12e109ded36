"""Safety properties and per-input verdicts: enumerate every distinct
transformed image over the critical set, query the model, check the property.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .critical import CriticalParamSet, ParamSpace, critical_params
from .image import Image
from .models import (Classification, ModelHandle, Prediction, QueryBudget,
                     Regression, predict_batch)
from .transforms import TransformSpec, apply


@dataclass(frozen=True)
class KSafe:
    """Top-1 of the transformed image must stay within the original top-k."""
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def to_json(self) -> dict:
        return {"kind": "k-safe", "k": self.k}


@dataclass(frozen=True)
class TSafe:
    """Regression output may move at most t from the original."""
    t: float = 0.1

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be >= 0")

    def to_json(self) -> dict:
        return {"kind": "t-safe", "t": self.t}


@dataclass(frozen=True)
class SafetyProperty:
    name: str
    transform: TransformSpec
    space: ParamSpace
    checker: KSafe | TSafe

    def to_json(self) -> dict:
        return {"name": self.name, "transform": self.transform.describe(),
                "space": self.space.to_json(), "checker": self.checker.to_json()}


@dataclass(frozen=True)
class Violation:
    param: object                 # smallest parameter producing the image
    digest: str                   # transformed image digest
    raw_param_count: int          # parameters collapsing onto this image
    params: tuple                 # all of them, ascending
    original: Prediction
    transformed: Prediction

    def to_json(self) -> dict:
        from .critical import _param_json
        return {"param": _param_json(self.param), "digest": self.digest,
                "raw_param_count": self.raw_param_count,
                "params": [_param_json(p) for p in self.params],
                "original": self.original.to_json(),
                "transformed": self.transformed.to_json()}


@dataclass
class Verdict:
    input_id: str
    property_name: str
    status: str                   # "verified" | "violated"
    violations: list[Violation] = field(default_factory=list)
    outputs_enumerated: int = 0
    model_calls: int = 0
    wall_time_s: float = 0.0      # kept out of the deterministic report JSON

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def violation_param_count(self) -> int:
        return sum(v.raw_param_count for v in self.violations)

    def to_json(self) -> dict:
        return {"input_id": self.input_id, "property": self.property_name,
                "status": self.status,
                "outputs_enumerated": self.outputs_enumerated,
                "model_calls": self.model_calls,
                "violations": [v.to_json() for v in self.violations]}


@dataclass(frozen=True)
class EnumOutput:
    param: object
    image: Image
    digest: str
    params: tuple


def enumerate_outputs(img: Image, spec: TransformSpec,
                      cset: CriticalParamSet) -> list[EnumOutput]:
    """Distinct transformed images over the critical set's evaluation
    parameters, each with its smallest producing parameter plus all the
    parameters that collapse onto it, ordered by parameter."""
    if cset.dims != img.dims:
        raise ValueError(f"critical set computed for {cset.dims}, "
                         f"image is {img.dims}")
    seen: dict[str, int] = {}
    firsts: list[tuple[object, Image, str]] = []
    collapsed: list[list] = []
    for param in cset.eval_params:
        out = apply(spec, img, param)
        d = out.digest()
        idx = seen.get(d)
        if idx is None:
            seen[d] = len(firsts)
            firsts.append((param, out, d))
            collapsed.append([param])
        else:
            collapsed[idx].append(param)
    return [EnumOutput(param=p, image=im, digest=d, params=tuple(ps))
            for (p, im, d), ps in zip(firsts, collapsed)]


def check_k_safe(original: Prediction, transformed: Prediction, k: int) -> bool:
    if not isinstance(original, Classification) \
            or not isinstance(transformed, Classification):
        raise TypeError("k-safety applies to classification predictions")
    return transformed.top1() in original.topk(k)


def check_t_safe(original: Prediction, transformed: Prediction,
                 t: float) -> bool:
    if not isinstance(original, Regression) \
            or not isinstance(transformed, Regression):
        raise TypeError("t-safety applies to regression predictions")
    return abs(transformed.value - original.value) <= t


def _check(checker: KSafe | TSafe, original: Prediction,
           transformed: Prediction) -> bool:
    if isinstance(checker, KSafe):
        return check_k_safe(original, transformed, checker.k)
    return check_t_safe(original, transformed, checker.t)


def verify_local(handle: ModelHandle, img: Image, prop: SafetyProperty,
                 input_id: str = "input", budget: QueryBudget | None = None,
                 cset: CriticalParamSet | None = None) -> Verdict:
    """Exhaustive per-input check of `prop` against the model.

    The original prediction is taken once on the untransformed image; every
    distinct transformed image over the critical set is then predicted in
    batches.  Verified means zero violations across the entire set.
    """
    t0 = time.perf_counter()
    if cset is None:
        cset = critical_params(prop.transform, prop.space, img.dims)
    original = predict_batch(handle, [img], budget=budget)[0]
    outputs = enumerate_outputs(img, prop.transform, cset)
    preds = predict_batch(handle, [o.image for o in outputs], budget=budget)
    violations = [
        Violation(param=o.param, digest=o.digest,
                  raw_param_count=len(o.params), params=o.params,
                  original=original, transformed=pred)
        for o, pred in zip(outputs, preds)
        if not _check(prop.checker, original, pred)
    ]
    return Verdict(
        input_id=input_id, property_name=prop.name,
        status="verified" if not violations else "violated",
        violations=violations, outputs_enumerated=len(outputs),
        model_calls=1 + len(outputs),
        wall_time_s=time.perf_counter() - t0)
