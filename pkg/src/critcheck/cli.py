"""Command-line front end.

Verbs: verify, enumerate, export-violations, oracle-check, throughput.
Flags override config-file settings (precedence: config file < flags).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._backend import BACKEND
from .critical import ParamSpace, count_bound, critical_params
from .image import Image, read_png
from .models import ModelHandle, builtin_models, throughput_probe
from .oracle import DEFAULT_STEP, coverage_check, dense_sweep
from .report import (OperationalError, RunConfig, export_violations,
                     run_verify, transform_from_json)
from .transforms import TransformSpec
from .verifier import enumerate_outputs

ORACLE_PIXEL_GUARD = 400


def _parse_dims(text: str) -> tuple[int, int]:
    if "x" in text:
        w, h = text.lower().split("x", 1)
        return int(w), int(h)
    n = int(text)
    return n, n


def _parse_space(text: str, kind: str) -> ParamSpace:
    """Accepts full JSON ({"kind":...}) or the shorthand "[lo,hi]" /
    "[[xlo,xhi],[ylo,yhi]]" with the scalar/pair int-ness inferred from the
    transform kind."""
    int_scalar = kind in ("avg_smooth", "median_smooth", "erosion", "dilation",
                          "fog", "brightness")
    int_pair = kind in ("occlusion", "translation")
    try:
        val = json.loads(text)
    except json.JSONDecodeError:
        if kind == "reflection":
            return ParamSpace.of_choices(*[t.strip() for t in text.split(",")])
        raise
    if isinstance(val, dict):
        return ParamSpace.from_json(val)
    if isinstance(val, list) and len(val) == 2 and all(
            isinstance(v, (int, float)) for v in val):
        return (ParamSpace.integers if int_scalar else ParamSpace.reals)(*val)
    if isinstance(val, list) and len(val) == 2 and all(
            isinstance(v, list) for v in val):
        (xlo, xhi), (ylo, yhi) = val
        ctor = ParamSpace.integer_pairs if int_pair else ParamSpace.real_pairs
        return ctor(xlo, xhi, ylo, yhi)
    raise ValueError(f"cannot parse space {text!r}")


def _transform_from_args(args) -> TransformSpec:
    d = {"kind": args.transform}
    if getattr(args, "mask", None):
        d["mask"] = args.mask
    return transform_from_json(d)


def _model_from_args(spec: str, task: str | None, batch_size: int) -> ModelHandle:
    if ":" not in spec:
        spec = f"builtin:{spec}"
    transport, _, rest = spec.partition(":")
    if transport == "builtin":
        if rest not in builtin_models():
            raise SystemExit(
                f"unknown builtin model {rest!r}; available: "
                f"{', '.join(builtin_models())}")
        return ModelHandle.builtin(rest, batch_size=batch_size)
    if task is None:
        raise SystemExit("--task is required for non-builtin models")
    if transport == "subprocess":
        return ModelHandle(transport="subprocess", task=task, command=rest,
                           batch_size=batch_size)
    if transport == "http":
        return ModelHandle(transport="http", task=task, endpoint=rest,
                           batch_size=batch_size)
    raise SystemExit(f"unknown model transport {transport!r}")


def cmd_verify(args) -> int:
    cfg_dict = {}
    base = Path(".")
    if args.config:
        base = Path(args.config).resolve().parent
        cfg_dict = json.loads(Path(args.config).read_text())
    # flag overrides
    if args.corpus:
        cfg_dict["corpus"] = args.corpus
        base = Path(".")
    if args.out:
        cfg_dict["outdir"] = args.out
    if args.model:
        handle = _model_from_args(args.model, args.task, args.batch_size or 64)
        cfg_dict["model"] = handle.describe()
        if handle.name:
            cfg_dict["model"]["name"] = handle.name
    if args.batch_size:
        cfg_dict.setdefault("model", {})["batch_size"] = args.batch_size
    if args.budget is not None:
        cfg_dict["query_budget"] = args.budget
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.sample is not None:
        cfg_dict["sample_n"] = args.sample
    if args.parallelism is not None:
        cfg_dict["parallelism"] = args.parallelism
    if "outdir" not in cfg_dict:
        cfg_dict["outdir"] = "critcheck-out"
    try:
        config = RunConfig.from_json(cfg_dict, base_dir=base)
    except (KeyError, ValueError, OSError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2
    try:
        report, code = run_verify(config)
    except OperationalError as exc:
        print(f"operational error: {exc}", file=sys.stderr)
        return 2
    agg = report.aggregates
    print(f"inputs: {agg['inputs_total']}  verified: {agg['verified_inputs']} "
          f"({agg['verified_pct']}%)  violations: "
          f"{agg['total_violation_params']} params / "
          f"{agg['total_violation_images']} images")
    print(f"report: {config.outdir / 'report.json'}")
    return code


def cmd_enumerate(args) -> int:
    dims = _parse_dims(args.dims)
    try:
        spec = _transform_from_args(args)
        space = _parse_space(args.space, spec.kind) if args.space else None
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.count_only:
            tag, count = count_bound(spec, space, dims)
            print(f"{spec.kind} at {dims[0]}x{dims[1]}: |C_critical| = {count} "
                  f"(verification complexity {tag})")
            return 0
        cset = critical_params(spec, space, dims)
        tag, _ = count_bound(spec, cset.space, dims)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{spec.kind} at {dims[0]}x{dims[1]}: |C_critical| = "
          f"{len(cset.values)} (verification complexity {tag}, "
          f"{len(cset.eval_params)} evaluation points)")
    if args.dump:
        payload = cset.to_json()
        if args.out:
            Path(args.out).write_text(json.dumps(payload, indent=1) + "\n")
            print(f"values written to {args.out}")
        else:
            json.dump(payload, sys.stdout, indent=1)
            print()
    return 0


def cmd_export_violations(args) -> int:
    try:
        result = export_violations(Path(args.report), Path(args.out))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {result['exported']} violating images to "
          f"{result['outdir']} (manifest.json alongside)")
    return 0


def cmd_oracle_check(args) -> int:
    img = read_png(args.image)
    if img.width * img.height > ORACLE_PIXEL_GUARD:
        print(f"error: image has {img.width * img.height} pixels; the dense "
              f"sweep is only tractable up to {ORACLE_PIXEL_GUARD} "
              "(use a smaller image: completeness is dimension-generic)",
              file=sys.stderr)
        return 2
    try:
        spec = _transform_from_args(args)
        space = _parse_space(args.space, spec.kind)
        cset = critical_params(spec, space, img.dims)
        outputs = enumerate_outputs(img, spec, cset)
        sweep = dense_sweep(img, spec, space, step=args.step)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = coverage_check(((o.digest, o.param) for o in outputs), sweep)
    print(f"critical outputs: {len(outputs)}  sweep outputs: {len(sweep)}  "
          f"missing: {len(report.missing)}  surplus: {len(report.surplus)}")
    if not report.complete:
        json.dump(report.to_json(), sys.stdout, indent=1)
        print()
        return 1
    print("PASS: critical enumeration covers the dense sweep exactly")
    return 0


def cmd_throughput(args) -> int:
    dims = _parse_dims(args.dims)
    handle = _model_from_args(args.model, args.task, args.batch_size)
    rng = np.random.default_rng(args.seed)
    imgs = [Image(rng.integers(0, 256, size=(dims[1], dims[0], 1),
                               dtype=np.uint8))
            for _ in range(args.count)]
    single = throughput_probe(handle, imgs, "single")
    batched = throughput_probe(handle, imgs, "batched")
    print(f"single:  {single:10.1f} images/s")
    print(f"batched: {batched:10.1f} images/s (batch_size={args.batch_size})")
    print(f"speedup: {batched / single:.2f}x")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="critcheck",
        description="Blackbox robustness verification of image models by "
                    "exhaustive enumeration of transformed images "
                    f"(kernel backend: {BACKEND})")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("verify", help="run safety properties over a corpus")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--corpus", help="directory of PNG inputs")
    p.add_argument("--out", help="output directory")
    p.add_argument("--model", help="builtin:<name> | subprocess:<cmd> | http:<url>")
    p.add_argument("--task", choices=["classification", "regression"])
    p.add_argument("--batch-size", type=int)
    p.add_argument("--budget", type=int, help="max model queries this run")
    p.add_argument("--seed", type=int)
    p.add_argument("--sample", type=int, help="sample this many corpus inputs")
    p.add_argument("--parallelism", type=int)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("enumerate", help="count/dump critical parameter values")
    p.add_argument("--transform", required=True)
    p.add_argument("--space", help='e.g. \'[-2,2]\' or \'{"kind":"real",...}\'')
    p.add_argument("--dims", required=True, help="e.g. 224x224 or 224")
    p.add_argument("--mask", help="PNG mask for occlusion/fog")
    p.add_argument("--dump", action="store_true", help="emit values as JSON")
    p.add_argument("--out", help="write the JSON dump here")
    p.add_argument("--count-only", action="store_true",
                   help="size without materializing values")
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("export-violations",
                       help="write violating images + manifest from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_violations)

    p = sub.add_parser("oracle-check",
                       help="dense-sweep completeness check on a small image")
    p.add_argument("--transform", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--mask")
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.set_defaults(fn=cmd_oracle_check)

    p = sub.add_parser("throughput", help="batched vs single prediction rate")
    p.add_argument("--model", default="builtin:mean-intensity")
    p.add_argument("--task", choices=["classification", "regression"])
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--dims", default="8x8")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_throughput)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
