"""Acceptance criterion 9: the wrapped mean-intensity predictor served by the
adapter over stdio and over HTTP yields verdicts identical to the builtin
path on a 10-image, 3-property run.

Skipped when the adapter has not been built (the primary suite must run
without the secondary component).
"""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from critcheck import write_png
from critcheck.models import close_connections
from critcheck.report import RunConfig, run_verify
from conftest import rand_image

ADAPTER_CLI = Path(__file__).parent.parent / "adapter" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not ADAPTER_CLI.exists(),
    reason="secondary component not built (adapter/dist missing or no node)")


PROPERTIES = [
    {"name": "brightness-k1", "transform": {"kind": "brightness"},
     "space": {"kind": "int", "lo": -40, "hi": 40},
     "checker": {"kind": "k-safe", "k": 1}},
    {"name": "smooth-k1", "transform": {"kind": "avg_smooth"},
     "space": {"kind": "int", "lo": 2, "hi": 8},
     "checker": {"kind": "k-safe", "k": 1}},
    {"name": "reflect-k2", "transform": {"kind": "reflection"},
     "space": {"kind": "choice",
               "choices": ["horizontal", "vertical", "central"]},
     "checker": {"kind": "k-safe", "k": 2}},
]


def build_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    rng = np.random.default_rng(90210)
    for k in range(10):
        write_png(rand_image(rng, 8, 8), corpus / f"img{k:02d}.png")
    return corpus


def run_with_model(tmp_path, corpus, name, model):
    cfg = {
        "model": model,
        "properties": PROPERTIES,
        "corpus": str(corpus),
        "outdir": str(tmp_path / name),
    }
    config = RunConfig.from_json(cfg)
    report, code = run_verify(config, log=lambda *a: None)
    payload = report.to_json()
    return code, payload["verdicts"], payload["aggregates"]


@pytest.fixture(scope="module")
def http_adapter():
    proc = subprocess.Popen(
        ["node", str(ADAPTER_CLI), "--model", "mean-intensity",
         "--transport", "http", "--port", "0"],
        stdout=subprocess.PIPE)
    line = proc.stdout.readline()
    port = json.loads(line)["listening"]
    yield f"http://127.0.0.1:{port}/predict"
    proc.terminate()
    proc.wait(timeout=10)


def test_criterion_9_adapter_equivalence(tmp_path, http_adapter):
    corpus = build_corpus(tmp_path)
    builtin = {"transport": "builtin", "name": "mean-intensity",
               "task": "classification", "batch_size": 16}
    stdio = {"transport": "subprocess",
             "command": f"node {ADAPTER_CLI} --model mean-intensity "
                        "--transport stdio",
             "task": "classification", "batch_size": 16}
    http_model = {"transport": "http", "endpoint": http_adapter,
                  "task": "classification", "batch_size": 16}

    code_b, verdicts_b, agg_b = run_with_model(tmp_path, corpus, "builtin",
                                               builtin)
    code_s, verdicts_s, agg_s = run_with_model(tmp_path, corpus, "stdio",
                                               stdio)
    close_connections()
    code_h, verdicts_h, agg_h = run_with_model(tmp_path, corpus, "http",
                                               http_model)

    assert code_s == code_b and code_h == code_b
    canon = lambda v: json.dumps(v, sort_keys=True)
    assert canon(verdicts_s) == canon(verdicts_b), \
        "stdio adapter verdicts differ from the builtin path"
    assert canon(verdicts_h) == canon(verdicts_b), \
        "http adapter verdicts differ from the builtin path"
    assert agg_s == agg_b and agg_h == agg_b
    total = agg_b["total_violation_params"]
    print(f"\n[criterion 9] PASS: stdio and http adapter verdicts identical "
          f"to the builtin path (10 images x 3 properties, "
          f"{total} violating params)")


def test_regression_adapter_equivalence(tmp_path):
    # the centroid regressor through the wire: exercises float round-tripping
    # (shortest-representation JSON on both sides) and t-safety end to end
    corpus = build_corpus(tmp_path)
    prop = [{"name": "shift-t01", "transform": {"kind": "translation"},
             "space": {"kind": "int_pair", "x": [-4, 4], "y": [-4, 4]},
             "checker": {"kind": "t-safe", "t": 0.1}}]
    def run(name, model):
        cfg = {"model": model, "properties": prop, "corpus": str(corpus),
               "outdir": str(tmp_path / name)}
        report, code = run_verify(RunConfig.from_json(cfg),
                                  log=lambda *a: None)
        return code, report.to_json()["verdicts"]

    code_b, verdicts_b = run("reg-builtin",
                             {"transport": "builtin", "name": "centroid",
                              "task": "regression"})
    code_s, verdicts_s = run(
        "reg-stdio",
        {"transport": "subprocess",
         "command": f"node {ADAPTER_CLI} --model centroid --transport stdio",
         "task": "regression"})
    close_connections()
    assert code_s == code_b
    assert json.dumps(verdicts_s, sort_keys=True) == \
        json.dumps(verdicts_b, sort_keys=True)
