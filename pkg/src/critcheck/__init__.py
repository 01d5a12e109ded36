"""critcheck: exhaustive blackbox robustness checking for image models.

A parameterized image transformation over a continuous parameter space can
only produce finitely many distinct images, because pixel coordinates and
values are discrete.  This package enumerates the critical parameter values
where the output actually changes, evaluates a model on every distinct
transformed image, and renders per-input safety verdicts.
"""
from ._backend import BACKEND
from .critical import (CriticalParamSet, ParamSpace, compose, count_bound,
                       critical_params, invert_df, invert_dp)
from .image import Coord, Image, clamp_pixel, image_digest, read_png, \
    round_coord, write_png
from .models import (Classification, ModelHandle, Prediction, QueryBudget,
                     Regression, builtin_models, predict_batch,
                     throughput_probe)
from .oracle import coverage_check, dense_sweep
from .transforms import (TransformSpec, apply, apply_fog, dependence_function,
                         dependent_pixels, register_plugin)
from .verifier import (KSafe, SafetyProperty, TSafe, Verdict, Violation,
                       check_k_safe, check_t_safe, enumerate_outputs,
                       verify_local)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Classification", "Coord", "CriticalParamSet", "Image",
    "KSafe", "ModelHandle", "ParamSpace", "Prediction", "QueryBudget",
    "Regression", "SafetyProperty", "TSafe", "TransformSpec", "Verdict",
    "Violation", "apply", "apply_fog", "builtin_models", "check_k_safe",
    "check_t_safe", "clamp_pixel", "compose", "count_bound", "coverage_check",
    "critical_params", "dense_sweep", "dependence_function",
    "dependent_pixels", "enumerate_outputs", "image_digest", "invert_df",
    "invert_dp", "predict_batch", "read_png", "register_plugin",
    "round_coord", "throughput_probe", "verify_local", "write_png",
]
