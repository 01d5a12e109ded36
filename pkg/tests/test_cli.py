import json
from pathlib import Path

import numpy as np
import pytest

from critcheck import Image, read_png, write_png
from critcheck.cli import main
from conftest import rand_image, uniform_image


def write_corpus(tmp_path, values, dims=(8, 8)):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for k, v in enumerate(values):
        write_png(uniform_image(v, *dims), corpus / f"img{k:02d}.png")
    return corpus


def brightness_config(tmp_path, corpus, lo=-100, hi=100, k=1, budget=None,
                      out="out"):
    cfg = {
        "model": {"transport": "builtin", "name": "mean-intensity",
                  "task": "classification", "batch_size": 64},
        "properties": [{
            "name": "brightness-k%d" % k,
            "transform": {"kind": "brightness"},
            "space": {"kind": "int", "lo": lo, "hi": hi},
            "checker": {"kind": "k-safe", "k": k},
        }],
        "corpus": str(corpus),
        "outdir": str(tmp_path / out),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    if budget is not None:
        cfg["query_budget"] = budget
        path.write_text(json.dumps(cfg))
    return path, tmp_path / out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_constant_model_all_verified_exit0(tmp_path, capsys):
    corpus = write_corpus(tmp_path, [10, 60, 110, 160, 210])
    cfg, out = brightness_config(tmp_path, corpus)
    cfg_d = json.loads(cfg.read_text())
    cfg_d["model"] = {"transport": "builtin", "name": "constant-class",
                      "task": "classification"}
    cfg.write_text(json.dumps(cfg_d))
    code = main(["verify", "--config", str(cfg)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["aggregates"]["verified_pct"] == 100.0


def test_verify_finds_violations_exit1(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40, 72])
    cfg, out = brightness_config(tmp_path, corpus)
    code = main(["verify", "--config", str(cfg)])
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert report["aggregates"]["total_violation_params"] > 0
    assert (out / "timing.json").exists()
    assert (out / "progress.jsonl").exists()


def test_verify_deterministic_reports(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40, 72])
    cfg1, out1 = brightness_config(tmp_path, corpus, out="out1")
    code1 = main(["verify", "--config", str(cfg1)])
    cfg_d = json.loads(cfg1.read_text())
    cfg_d["outdir"] = str(tmp_path / "out2")
    cfg2 = tmp_path / "config2.json"
    cfg2.write_text(json.dumps(cfg_d))
    code2 = main(["verify", "--config", str(cfg2)])
    assert code1 == code2 == 1
    a = (out1 / "report.json").read_bytes()
    b = (tmp_path / "out2" / "report.json").read_bytes()
    assert a == b


def test_verify_budget_zero_exit2_progress_present(tmp_path):
    corpus = write_corpus(tmp_path, [8])
    cfg, out = brightness_config(tmp_path, corpus, budget=0)
    code = main(["verify", "--config", str(cfg)])
    assert code == 2
    assert (out / "progress.jsonl").exists()
    assert not (out / "report.json").exists()


def test_verify_resume_after_budget_produces_identical_report(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40, 72, 104])
    # budgeted run stops partway through
    cfg, out = brightness_config(tmp_path, corpus, budget=450, out="resumed")
    assert main(["verify", "--config", str(cfg)]) == 2
    partial = len((out / "progress.jsonl").read_text().splitlines()) - 1
    assert 1 <= partial < 4  # some verdicts persisted, not all
    # lift the budget and resume
    cfg_d = json.loads(cfg.read_text())
    del cfg_d["query_budget"]
    cfg.write_text(json.dumps(cfg_d))
    assert main(["verify", "--config", str(cfg)]) == 1
    # completed pairs were reused, not recomputed
    progress = (out / "progress.jsonl").read_text().splitlines()
    assert len(progress) == 1 + 4
    resumed = json.loads((out / "report.json").read_text())
    # uninterrupted reference run
    cfg_d["outdir"] = str(tmp_path / "fresh")
    cfg2 = tmp_path / "cfg-fresh.json"
    cfg2.write_text(json.dumps(cfg_d))
    assert main(["verify", "--config", str(cfg2)]) == 1
    fresh = json.loads((tmp_path / "fresh" / "report.json").read_text())
    assert resumed["verdicts"] == fresh["verdicts"]
    assert resumed["aggregates"] == fresh["aggregates"]


def test_verify_aggregates_recomputable(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40])
    cfg, out = brightness_config(tmp_path, corpus)
    main(["verify", "--config", str(cfg)])
    report = json.loads((out / "report.json").read_text())
    agg = report["aggregates"]
    total_params = sum(v["raw_param_count"] for verd in report["verdicts"]
                       for v in verd["violations"])
    total_images = sum(len(verd["violations"]) for verd in report["verdicts"])
    assert agg["total_violation_params"] == total_params
    assert agg["total_violation_images"] == total_images
    verified = [v for v in report["verdicts"] if v["status"] == "verified"]
    assert agg["verified_inputs"] == len({v["input_id"] for v in verified
                                          if all(w["status"] == "verified"
                                                 for w in report["verdicts"]
                                                 if w["input_id"] == v["input_id"])})


def test_verify_flag_overrides(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40, 72, 104, 136])
    cfg, out = brightness_config(tmp_path, corpus)
    code = main(["verify", "--config", str(cfg), "--sample", "2",
                 "--seed", "7", "--out", str(tmp_path / "alt")])
    assert code in (0, 1)
    report = json.loads((tmp_path / "alt" / "report.json").read_text())
    assert len(report["inputs"]) == 2


def test_verify_parallel_matches_sequential(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40, 72, 104])
    cfg, out = brightness_config(tmp_path, corpus)
    assert main(["verify", "--config", str(cfg)]) == 1
    cfg_d = json.loads(cfg.read_text())
    cfg_d["outdir"] = str(tmp_path / "par")
    cfg_d["parallelism"] = 4
    cfg2 = tmp_path / "cfg-par.json"
    cfg2.write_text(json.dumps(cfg_d))
    assert main(["verify", "--config", str(cfg2)]) == 1
    seq = json.loads((out / "report.json").read_text())
    par = json.loads((tmp_path / "par" / "report.json").read_text())
    assert par["verdicts"] == seq["verdicts"]
    assert par["aggregates"] == seq["aggregates"]


def test_verify_compose_config(tmp_path):
    corpus = write_corpus(tmp_path, [96])
    cfg_d = {
        "model": {"transport": "builtin", "name": "mean-intensity",
                  "task": "classification"},
        "properties": [{
            "name": "smooth-then-brighten",
            "compose": [
                {"transform": {"kind": "avg_smooth"},
                 "space": {"kind": "int", "lo": 2, "hi": 4}},
                {"transform": {"kind": "brightness"},
                 "space": {"kind": "int", "lo": -30, "hi": 30}},
            ],
            "checker": {"kind": "k-safe", "k": 1},
        }],
        "corpus": str(corpus),
        "outdir": str(tmp_path / "out"),
    }
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(cfg_d))
    code = main(["verify", "--config", str(cfg)])
    assert code in (0, 1)
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    verdict = report["verdicts"][0]
    assert verdict["outputs_enumerated"] <= 3 * 61
    # composite params serialize as [kernel, bias] pairs
    if verdict["violations"]:
        assert len(verdict["violations"][0]["param"]) == 2


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------

def test_enumerate_counts(tmp_path, capsys):
    assert main(["enumerate", "--transform", "avg_smooth",
                 "--space", "[2,10]", "--dims", "224"]) == 0
    out = capsys.readouterr().out
    assert "|C_critical| = 9" in out


def test_enumerate_count_only_skips_materialization(capsys):
    assert main(["enumerate", "--transform", "scale",
                 "--space", "[[0.5,1.5],[0.5,1.5]]", "--dims", "128",
                 "--count-only"]) == 0
    out = capsys.readouterr().out
    assert "O(n^2)" in out and "|C_critical| = " in out


def test_enumerate_occlusion_with_mask(tmp_path, capsys, rng):
    mask = rand_image(rng, 41, 41)
    write_png(mask, tmp_path / "mask.png")
    assert main(["enumerate", "--transform", "occlusion",
                 "--mask", str(tmp_path / "mask.png"), "--dims", "224"]) == 0
    assert "|C_critical| = 33856" in capsys.readouterr().out


def test_enumerate_dump_roundtrip(tmp_path, capsys):
    out_file = tmp_path / "vals.json"
    assert main(["enumerate", "--transform", "brightness",
                 "--space", "[-3,3]", "--dims", "8", "--dump",
                 "--out", str(out_file)]) == 0
    payload = json.loads(out_file.read_text())
    assert payload["values"] == [-3, -2, -1, 0, 1, 2, 3]
    assert payload["dims"] == [8, 8]


# ---------------------------------------------------------------------------
# oracle-check
# ---------------------------------------------------------------------------

def test_oracle_check_passes(tmp_path, capsys, rng):
    img = rand_image(rng, 8, 8)
    write_png(img, tmp_path / "img.png")
    assert main(["oracle-check", "--transform", "translation",
                 "--space", "[[-3,3],[-3,3]]", "--image",
                 str(tmp_path / "img.png")]) == 0
    assert "PASS" in capsys.readouterr().out


def test_oracle_check_rotation_small(tmp_path, rng):
    img = rand_image(rng, 8, 8)
    write_png(img, tmp_path / "img.png")
    assert main(["oracle-check", "--transform", "rotation",
                 "--space", "[-2,2]", "--image", str(tmp_path / "img.png"),
                 "--step", "1e-4"]) == 0


def test_oracle_check_rejects_large_images(tmp_path, capsys, rng):
    img = rand_image(rng, 64, 64)
    write_png(img, tmp_path / "big.png")
    assert main(["oracle-check", "--transform", "translation",
                 "--space", "[[-1,1],[-1,1]]", "--image",
                 str(tmp_path / "big.png")]) == 2
    assert "tractable" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# export-violations
# ---------------------------------------------------------------------------

def test_export_violations_roundtrip(tmp_path):
    corpus = write_corpus(tmp_path, [8, 40])
    cfg, out = brightness_config(tmp_path, corpus)
    assert main(["verify", "--config", str(cfg)]) == 1
    exp = tmp_path / "violations"
    assert main(["export-violations", "--report", str(out / "report.json"),
                 "--out", str(exp)]) == 0
    manifest = json.loads((exp / "manifest.json").read_text())
    report = json.loads((out / "report.json").read_text())
    total = sum(len(v["violations"]) for v in report["verdicts"])
    assert len(manifest["entries"]) == total
    pngs = sorted(exp.glob("*.png"))
    assert len(pngs) == total
    # replay: each exported image reproduces the recorded prediction
    from critcheck import ModelHandle, predict_batch
    handle = ModelHandle.builtin("mean-intensity")
    for entry in manifest["entries"]:
        img = read_png(exp / entry["png"])
        pred = predict_batch(handle, [img])[0]
        assert pred.to_json() == entry["transformed_prediction"]
        assert img.digest() == entry["digest"]
        assert len(entry["params"]) == entry["raw_param_count"]


def test_export_violations_empty_report_errors(tmp_path):
    corpus = write_corpus(tmp_path, [10])
    cfg, out = brightness_config(tmp_path, corpus)
    cfg_d = json.loads(cfg.read_text())
    cfg_d["model"] = {"transport": "builtin", "name": "constant-class",
                      "task": "classification"}
    cfg.write_text(json.dumps(cfg_d))
    assert main(["verify", "--config", str(cfg)]) == 0
    assert main(["export-violations", "--report", str(out / "report.json"),
                 "--out", str(tmp_path / "x")]) == 2


# ---------------------------------------------------------------------------
# throughput
# ---------------------------------------------------------------------------

def test_throughput_cli(capsys):
    assert main(["throughput", "--count", "1000", "--dims", "8x8",
                 "--batch-size", "64"]) == 0
    out = capsys.readouterr().out
    assert "speedup" in out
