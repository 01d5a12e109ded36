"""Run configuration, report assembly, persistence, resume, and violation
corpus export.

All persisted artifacts are JSON (images are PNG).  report.json is byte
deterministic for a deterministic model: wall-clock timings go to the
timing.json sidecar, never into the report.
"""
from __future__ import annotations

import hashlib
import json
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .critical import ParamSpace, _param_json, compose, critical_params
from .image import Image, read_png, write_png
from .models import (BudgetExhausted, ModelError, ModelHandle, QueryBudget,
                     predict_batch)
from .transforms import TransformSpec, apply
from .verifier import (KSafe, SafetyProperty, TSafe, Verdict, verify_local)

REPORT_SCHEMA = "critcheck-report-v1"


class OperationalError(Exception):
    """Run could not complete; partial progress is on disk."""


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def transform_from_json(d: dict, base_dir: Path | None = None) -> TransformSpec:
    kind = d["kind"]
    mask = None
    if "mask" in d:
        mask_path = Path(d["mask"])
        if base_dir is not None and not mask_path.is_absolute():
            mask_path = base_dir / mask_path
        mask = read_png(mask_path)
    parts = tuple(transform_from_json(p, base_dir) for p in d.get("parts", ()))
    return TransformSpec(kind=kind, mask=mask, parts=parts, name=d.get("name"))


def checker_from_json(d: dict | None):
    if d is None:
        d = {"kind": "k-safe"}
    if d["kind"] in ("k-safe", "ksafe"):
        return KSafe(k=int(d.get("k", 1)))
    if d["kind"] in ("t-safe", "tsafe"):
        return TSafe(t=float(d.get("t", 0.1)))
    raise ValueError(f"unknown checker kind {d['kind']!r}")


def property_from_json(d: dict, base_dir: Path | None = None) -> SafetyProperty:
    checker = checker_from_json(d.get("checker"))
    if "compose" in d:
        parts = [(transform_from_json(p["transform"], base_dir),
                  ParamSpace.from_json(p["space"])) for p in d["compose"]]
        transform = TransformSpec(kind="composite",
                                  parts=tuple(t for t, _ in parts))
        space = ParamSpace.product(*(s for _, s in parts))
    else:
        transform = transform_from_json(d["transform"], base_dir)
        space = ParamSpace.from_json(d["space"])
    return SafetyProperty(name=d["name"], transform=transform, space=space,
                          checker=checker)


@dataclass
class RunConfig:
    handle: ModelHandle
    properties: list[SafetyProperty]
    corpus: Path
    outdir: Path
    sample_n: int | None = None
    seed: int = 0
    query_budget: int | None = None
    parallelism: int = 1
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, d: dict, base_dir: Path | None = None) -> "RunConfig":
        base = base_dir or Path(".")
        m = d["model"]
        handle = ModelHandle(
            transport=m["transport"], task=m["task"], name=m.get("name", ""),
            command=m.get("command", ""), endpoint=m.get("endpoint", ""),
            batch_size=int(m.get("batch_size", 64)),
            timeout=float(m.get("timeout", 30.0)),
            max_inflight=int(m.get("max_inflight", 4)))
        props = [property_from_json(p, base) for p in d["properties"]]
        names = [p.name for p in props]
        if len(set(names)) != len(names):
            raise ValueError("property names must be unique")
        corpus = Path(d["corpus"])
        if not corpus.is_absolute():
            corpus = base / corpus
        outdir = Path(d["outdir"])
        if not outdir.is_absolute():
            outdir = base / outdir
        return cls(handle=handle, properties=props, corpus=corpus,
                   outdir=outdir, sample_n=d.get("sample_n"),
                   seed=int(d.get("seed", 0)),
                   query_budget=d.get("query_budget"),
                   parallelism=int(d.get("parallelism", 1)), raw=dict(d))

    def digest(self) -> str:
        # identity of the run's semantic inputs; operational limits (budget,
        # parallelism) stay out so progress survives lifting them
        canon = {
            "model": self.handle.describe(),
            "properties": [p.to_json() for p in self.properties],
            "corpus": str(self.corpus), "sample_n": self.sample_n,
            "seed": self.seed,
        }
        blob = json.dumps(canon, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=12).hexdigest()


def load_corpus(config: RunConfig) -> list[tuple[str, Path, Image]]:
    paths = sorted(config.corpus.glob("*.png"))
    if not paths:
        raise OperationalError(f"no PNG inputs under {config.corpus}")
    if config.sample_n is not None and config.sample_n < len(paths):
        rng = random.Random(config.seed)
        paths = sorted(rng.sample(paths, config.sample_n))
    return [(p.stem, p, read_png(p)) for p in paths]


# ---------------------------------------------------------------------------
# run + report
# ---------------------------------------------------------------------------

def _aggregate(verdicts: list[Verdict], input_ids: list[str],
               prop_names: list[str]) -> dict:
    per_property: dict = {}
    per_input: dict = {i: {} for i in input_ids}
    for name in prop_names:
        vs = [v for v in verdicts if v.property_name == name]
        params = sum(v.violation_param_count() for v in vs)
        images = sum(len(v.violations) for v in vs)
        verified = sum(1 for v in vs if v.verified)
        per_property[name] = {
            "violation_params": params,
            "violation_images": images,
            "verified_inputs": verified,
            "inputs": len(vs),
            "verified_pct": round(100.0 * verified / len(vs), 4) if vs else 0.0,
        }
    for v in verdicts:
        per_input[v.input_id][v.property_name] = {
            "violation_params": v.violation_param_count(),
            "violation_images": len(v.violations),
        }
    fully_verified = sum(
        1 for i in input_ids
        if all(v.verified for v in verdicts if v.input_id == i))
    return {
        "per_property": per_property,
        "per_input": per_input,
        "total_violation_params": sum(
            p["violation_params"] for p in per_property.values()),
        "total_violation_images": sum(
            p["violation_images"] for p in per_property.values()),
        "verified_inputs": fully_verified,
        "inputs_total": len(input_ids),
        "verified_pct": round(100.0 * fully_verified / len(input_ids), 4)
        if input_ids else 0.0,
    }


@dataclass
class RunReport:
    config_digest: str
    model: dict
    inputs: list[dict]
    properties: list[dict]
    verdicts: list[Verdict]
    aggregates: dict

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "config_digest": self.config_digest,
            "model": self.model,
            "inputs": self.inputs,
            "properties": self.properties,
            "verdicts": [v.to_json() for v in self.verdicts],
            "aggregates": self.aggregates,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @property
    def all_verified(self) -> bool:
        return all(v.verified for v in self.verdicts)


def _verdict_from_json(d: dict) -> Verdict:
    from .models import prediction_from_json
    from .verifier import Violation
    violations = [
        Violation(param=_param_from_json(v["param"]), digest=v["digest"],
                  raw_param_count=v["raw_param_count"],
                  params=tuple(_param_from_json(p) for p in v["params"]),
                  original=prediction_from_json(v["original"]),
                  transformed=prediction_from_json(v["transformed"]))
        for v in d["violations"]]
    return Verdict(input_id=d["input_id"], property_name=d["property"],
                   status=d["status"], violations=violations,
                   outputs_enumerated=d["outputs_enumerated"],
                   model_calls=d["model_calls"])


def _param_from_json(p):
    if isinstance(p, list):
        return tuple(_param_from_json(x) for x in p)
    return p


def run_verify(config: RunConfig, log=print) -> tuple[RunReport, int]:
    """Execute the full verification run.  Returns (report, exit_code):
    0 all inputs verified, 1 violations found.  Raises OperationalError on
    failures past retry; progress persists across invocations."""
    config.outdir.mkdir(parents=True, exist_ok=True)
    progress_path = config.outdir / "progress.jsonl"
    cfg_digest = config.digest()

    done: dict[tuple[str, str], tuple[Verdict, float]] = {}
    if progress_path.exists():
        lines = progress_path.read_text().splitlines()
        if lines and json.loads(lines[0]).get("config_digest") == cfg_digest:
            for line in lines[1:]:
                entry = json.loads(line)
                v = _verdict_from_json(entry["verdict"])
                done[(v.input_id, v.property_name)] = (v, entry["wall_time_s"])
        else:
            progress_path.unlink()

    if not progress_path.exists():
        with open(progress_path, "w") as fp:
            fp.write(json.dumps({"config_digest": cfg_digest}) + "\n")

    inputs = load_corpus(config)
    # the budget caps queries per invocation; resumed work is not re-charged
    budget = QueryBudget(config.query_budget)

    pending = [(iid, img, prop) for iid, _, img in inputs
               for prop in config.properties
               if (iid, prop.name) not in done]

    # critical sets depend only on dims: share across same-sized inputs
    cset_cache: dict = {}
    cache_lock = threading.Lock()

    def cset_for(prop: SafetyProperty, dims):
        key = (prop.name, dims)
        with cache_lock:
            if key not in cset_cache:
                cset_cache[key] = critical_params(prop.transform, prop.space,
                                                  dims)
            return cset_cache[key]

    write_lock = threading.Lock()
    progress_fp = open(progress_path, "a")

    def run_one(job):
        iid, img, prop = job
        verdict = verify_local(config.handle, img, prop, input_id=iid,
                               budget=budget, cset=cset_for(prop, img.dims))
        with write_lock:
            done[(iid, prop.name)] = (verdict, verdict.wall_time_s)
            progress_fp.write(json.dumps(
                {"verdict": verdict.to_json(),
                 "wall_time_s": verdict.wall_time_s}) + "\n")
            progress_fp.flush()
            log(f"  {iid} / {prop.name}: {verdict.status} "
                f"({len(verdict.violations)} violating images, "
                f"{verdict.violation_param_count()} violating params)")

    try:
        workers = max(1, config.parallelism)
        if workers == 1:
            for job in pending:
                run_one(job)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for fut in [pool.submit(run_one, job) for job in pending]:
                    fut.result()
    except (BudgetExhausted, ModelError) as exc:
        raise OperationalError(str(exc)) from exc
    finally:
        progress_fp.close()

    input_ids = [iid for iid, _, _ in inputs]
    verdicts = [done[(iid, prop.name)][0]
                for iid in input_ids for prop in config.properties]
    report = RunReport(
        config_digest=cfg_digest,
        model=config.handle.describe(),
        inputs=[{"id": iid, "path": str(path), "digest": img.digest()}
                for iid, path, img in inputs],
        properties=[p.to_json() for p in config.properties],
        verdicts=verdicts,
        aggregates=_aggregate(verdicts, input_ids,
                              [p.name for p in config.properties]))

    (config.outdir / "report.json").write_text(report.dumps())

    times: dict[str, list[float]] = {p.name: [] for p in config.properties}
    per_verdict = []
    for iid in input_ids:
        for prop in config.properties:
            _, wt = done[(iid, prop.name)]
            times[prop.name].append(wt)
            per_verdict.append({"input_id": iid, "property": prop.name,
                                "wall_time_s": wt})
    timing = {
        "per_property_avg_s": {
            name: (sum(ts) / len(ts) if ts else 0.0)
            for name, ts in times.items()},
        "per_verdict": per_verdict,
    }
    (config.outdir / "timing.json").write_text(
        json.dumps(timing, sort_keys=True, indent=1) + "\n")

    return report, (0 if report.all_verified else 1)


# ---------------------------------------------------------------------------
# violation corpus export
# ---------------------------------------------------------------------------

def export_violations(report_path: Path, outdir: Path) -> dict:
    """Write every violating transformed image as a PNG plus manifest.json.
    Transformed images are regenerated from the recorded inputs and
    parameters; digests are re-checked against the report."""
    report = json.loads(Path(report_path).read_text())
    total = sum(len(v["violations"]) for v in report["verdicts"])
    if total == 0:
        raise ValueError("report contains no violations to export")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    inputs = {e["id"]: e for e in report["inputs"]}
    props = {p["name"]: p for p in report["properties"]}
    base = Path(report_path).parent
    manifest = []
    n = 0
    for verdict in report["verdicts"]:
        if not verdict["violations"]:
            continue
        entry = inputs[verdict["input_id"]]
        ipath = Path(entry["path"])
        if not ipath.is_absolute():
            ipath = base / ipath
        img = read_png(ipath)
        pd = props[verdict["property"]]
        spec = _spec_from_describe(pd["transform"])
        for v in verdict["violations"]:
            param = _param_from_json(v["param"])
            out = apply(spec, img, param)
            if out.digest() != v["digest"]:
                raise ValueError(
                    f"regenerated image for {verdict['input_id']}/"
                    f"{verdict['property']} does not match the recorded digest")
            png_name = f"{verdict['input_id']}__{verdict['property']}__{n:05d}.png"
            write_png(out, outdir / png_name)
            manifest.append({
                "png": png_name,
                "input_id": verdict["input_id"],
                "property": verdict["property"],
                "transform": pd["transform"],
                "param": v["param"],
                "params": v["params"],
                "raw_param_count": v["raw_param_count"],
                "digest": v["digest"],
                "original_prediction": v["original"],
                "transformed_prediction": v["transformed"],
            })
            n += 1
    (outdir / "manifest.json").write_text(
        json.dumps({"entries": manifest}, sort_keys=True, indent=1) + "\n")
    return {"exported": n, "outdir": str(outdir)}


def _spec_from_describe(d: dict) -> TransformSpec:
    import base64

    import numpy as np
    mask = None
    if "mask" in d:
        m = d["mask"]
        data = base64.b64decode(m["pixels"])
        arr = np.frombuffer(data, dtype=np.uint8).reshape(
            m["height"], m["width"], m["channels"])
        mask = Image(arr.copy())
    parts = tuple(_spec_from_describe(p) for p in d.get("parts", ()))
    return TransformSpec(kind=d["kind"], mask=mask, parts=parts,
                         name=d.get("name"))
