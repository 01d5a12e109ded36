"""Uniform blackbox model access.

Three transports behind one handle: deterministic builtin toy models,
an external process speaking length-delimited JSON over stdio, and an HTTP
endpoint speaking the same payloads.

Wire schema (bit-exact field names):

  request   {"id": str, "width": int, "height": int, "channels": int,
             "pixels": base64 of raw row-major channel-interleaved bytes}
  response  {"id": str, "kind": "classification",
             "labels": [{"label": str, "score": number?}, ...]}   (score desc)
         or {"id": str, "kind": "regression", "value": number}
         or {"id": str, "kind": "error", "message": str}

Stdio framing: each message is "<decimal byte length>\\n" followed by exactly
that many bytes of UTF-8 JSON.  One batch is in flight per connection; the
responses of a batch may arrive in any order and are matched by id.
"""
from __future__ import annotations

import base64
import json
import os
import select
import shlex
import subprocess
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .image import Image

ENDPOINT_ENV = "CRITCHECK_ENDPOINT"


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    """Ranked labels, strictly ordered by (score desc, label asc).
    Scores may be None when the model reports rank order only."""
    labels: tuple[tuple[str, float | None], ...]

    def top1(self) -> str:
        return self.labels[0][0]

    def topk(self, k: int) -> tuple[str, ...]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(self.labels) < k:
            raise ValueError(f"prediction has {len(self.labels)} labels, need {k}")
        return tuple(label for label, _ in self.labels[:k])

    def to_json(self) -> dict:
        return {"kind": "classification",
                "labels": [{"label": l, **({} if s is None else {"score": s})}
                           for l, s in self.labels]}


@dataclass(frozen=True)
class Regression:
    value: float

    def to_json(self) -> dict:
        return {"kind": "regression", "value": self.value}


Prediction = Classification | Regression


def prediction_from_json(d: dict) -> Prediction:
    kind = d.get("kind")
    if kind == "classification":
        # ints arrive from JSON encoders that shorten 1.0 to 1
        labels = tuple(
            (e["label"], None if e.get("score") is None else float(e["score"]))
            for e in d["labels"])
        return canonical_classification(labels)
    if kind == "regression":
        v = d["value"]
        if isinstance(v, list):
            if not v:
                raise ModelProtocolError("empty regression vector")
            v = v[0]
        return Regression(float(v))
    raise ModelProtocolError(f"unknown prediction kind {kind!r}")


def canonical_classification(labels) -> Classification:
    """Re-sorts scored labels by (score desc, label asc); unscored rank order
    is taken as authoritative."""
    labels = tuple(labels)
    if not labels:
        raise ModelProtocolError("classification with no labels")
    if all(s is not None for _, s in labels):
        labels = tuple(sorted(labels, key=lambda e: (-e[1], e[0])))
    return Classification(labels)


class ModelError(Exception):
    """Transport failure or model-side error past the retry."""


class ModelProtocolError(ModelError):
    """Malformed response or id mismatch."""


class BudgetExhausted(ModelError):
    """The per-run query budget ran out; progress so far is persisted."""


class QueryBudget:
    """Counts individual image predictions against an optional cap."""

    def __init__(self, limit: int | None):
        self.limit = limit
        self.used = 0
        self._lock = threading.Lock()

    def charge(self, n: int) -> None:
        with self._lock:
            if self.limit is not None and self.used + n > self.limit:
                raise BudgetExhausted(
                    f"query budget {self.limit} exhausted ({self.used} used, "
                    f"{n} more requested)")
            self.used += n


# ---------------------------------------------------------------------------
# handle
# ---------------------------------------------------------------------------

@dataclass
class ModelHandle:
    """transport: "builtin" (name), "subprocess" (command), "http" (endpoint)."""
    transport: str
    task: str                       # "classification" | "regression"
    name: str = ""
    command: str = ""
    endpoint: str = ""
    batch_size: int = 64
    timeout: float = 30.0
    max_inflight: int = 4

    def __post_init__(self):
        if self.transport not in ("builtin", "subprocess", "http"):
            raise ValueError(f"unknown transport {self.transport!r}")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.transport == "http" and not self.endpoint:
            self.endpoint = os.environ.get(ENDPOINT_ENV, "")
            if not self.endpoint:
                raise ValueError(
                    f"http transport needs an endpoint (or ${ENDPOINT_ENV})")

    @classmethod
    def builtin(cls, name: str, **kw) -> "ModelHandle":
        task = builtin_models()[name]["task"]
        return cls(transport="builtin", task=task, name=name, **kw)

    def describe(self) -> dict:
        d = {"transport": self.transport, "task": self.task,
             "batch_size": self.batch_size}
        if self.name:
            d["name"] = self.name
        if self.command:
            d["command"] = self.command
        if self.endpoint:
            d["endpoint"] = self.endpoint
        return d


# ---------------------------------------------------------------------------
# builtin toy models (deterministic, vectorized per batch)
# ---------------------------------------------------------------------------

MEAN_LABELS = tuple(f"c{m}" for m in range(8))


def _mean_prediction(win: int) -> Classification:
    labels = tuple((MEAN_LABELS[m], 1.0 - abs(m - win) / 8.0)
                   for m in range(8))
    return canonical_classification(labels)


# only eight rankings exist, one per winning label
_MEAN_PREDS = tuple(_mean_prediction(win) for win in range(8))


def _mean_intensity(imgs: Sequence[Image]) -> list[Prediction]:
    """Label "c" + floor(mean/32); score 1 at the winner with linear falloff
    1 - |m - winner|/8 for the other seven labels."""
    stacked = np.stack([im.array for im in imgs]).reshape(len(imgs), -1)
    means = stacked.mean(axis=1, dtype=np.float64)
    wins = np.minimum(means // 32, 7).astype(np.int64)
    return [_MEAN_PREDS[w] for w in wins]


def _centroid(imgs: Sequence[Image]) -> list[Prediction]:
    """Normalized x-offset of the intensity centroid, in [-1, 1]; 0 when the
    image carries no intensity at all."""
    stacked = np.stack([im.array for im in imgs])        # (N, H, W, C)
    w = stacked.sum(axis=3, dtype=np.int64)              # (N, H, W)
    totals = w.sum(axis=(1, 2))
    width = stacked.shape[2]
    xs = np.arange(width, dtype=np.int64)
    moments = (w.sum(axis=1) * xs).sum(axis=1)
    out: list[Prediction] = []
    cx = (width - 1) / 2.0
    for total, moment in zip(totals, moments):
        if total == 0 or width == 1:
            out.append(Regression(0.0))
        else:
            out.append(Regression((float(moment) / int(total) - cx) / cx))
    return out


_CONSTANT_LABELS = tuple((f"c{m}", 1.0 - m / 8.0) for m in range(8))


def _constant_class(imgs: Sequence[Image]) -> list[Prediction]:
    pred = canonical_classification(_CONSTANT_LABELS)
    return [pred for _ in imgs]


def _constant_reg(imgs: Sequence[Image]) -> list[Prediction]:
    return [Regression(0.0) for _ in imgs]


_BUILTINS = {
    "mean-intensity": {"task": "classification", "fn": _mean_intensity,
                       "doc": "label c<floor(mean/32)>, linear score falloff"},
    "centroid": {"task": "regression", "fn": _centroid,
                 "doc": "normalized x-offset of the intensity centroid"},
    "constant-class": {"task": "classification", "fn": _constant_class,
                       "doc": "fixed ranking c0..c7"},
    "constant-reg": {"task": "regression", "fn": _constant_reg,
                     "doc": "always 0.0"},
}


def builtin_models() -> dict:
    """Catalog of the deterministic builtin models."""
    return {name: {"task": info["task"], "doc": info["doc"]}
            for name, info in _BUILTINS.items()}


# ---------------------------------------------------------------------------
# wire helpers
# ---------------------------------------------------------------------------

def encode_request(req_id: str, img: Image) -> dict:
    return {"id": req_id, "width": img.width, "height": img.height,
            "channels": img.channels,
            "pixels": base64.b64encode(img.tobytes()).decode("ascii")}


def write_frame(stream, payload: dict) -> None:
    data = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    stream.write(f"{len(data)}\n".encode("ascii"))
    stream.write(data)
    stream.flush()


def read_frame(stream) -> dict | None:
    header = stream.readline()
    if not header:
        return None
    try:
        length = int(header.strip())
    except ValueError as exc:
        raise ModelProtocolError(f"bad frame header {header!r}") from exc
    data = stream.read(length)
    if len(data) != length:
        raise ModelProtocolError("truncated frame")
    return json.loads(data.decode("utf-8"))


def _parse_response(resp: dict, task: str) -> Prediction:
    if resp.get("kind") == "error":
        raise ModelError(f"model error: {resp.get('message', 'unspecified')}")
    pred = prediction_from_json(resp)
    if task == "classification" and not isinstance(pred, Classification):
        raise ModelProtocolError("expected a classification response")
    if task == "regression" and not isinstance(pred, Regression):
        raise ModelProtocolError("expected a regression response")
    return pred


# ---------------------------------------------------------------------------
# transports
# ---------------------------------------------------------------------------

class _SubprocessConnection:
    """One in-flight batch per connection; a lock serializes callers so the
    stdio stream never interleaves.  Reads go through select() with a
    deadline so a hung model raises instead of blocking forever."""

    def __init__(self, command: str, timeout: float):
        self.command = command
        self.timeout = timeout
        self.proc: subprocess.Popen | None = None
        self._buf = b""
        self._lock = threading.Lock()

    def _ensure(self) -> subprocess.Popen:
        if self.proc is None or self.proc.poll() is not None:
            self.proc = subprocess.Popen(
                shlex.split(self.command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, bufsize=0)
            self._buf = b""
        return self.proc

    def close(self) -> None:
        with self._lock:
            self._close_locked()

    def _close_locked(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            self.proc.stdin.close()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
        self.proc = None
        self._buf = b""

    def _fill(self, fd: int, deadline: float) -> None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise ModelError("subprocess model timed out")
        ready, _, _ = select.select([fd], [], [], remaining)
        if not ready:
            raise ModelError("subprocess model timed out")
        chunk = os.read(fd, 65536)
        if not chunk:
            raise ModelError("subprocess model closed its stdout")
        self._buf += chunk

    def _read_line(self, fd: int, deadline: float) -> bytes:
        while b"\n" not in self._buf:
            self._fill(fd, deadline)
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def _read_exact(self, fd: int, n: int, deadline: float) -> bytes:
        while len(self._buf) < n:
            self._fill(fd, deadline)
        data, self._buf = self._buf[:n], self._buf[n:]
        return data

    def _read_response(self, fd: int, deadline: float) -> dict:
        header = self._read_line(fd, deadline)
        try:
            length = int(header.strip())
        except ValueError as exc:
            raise ModelProtocolError(f"bad frame header {header!r}") from exc
        return json.loads(self._read_exact(fd, length, deadline).decode("utf-8"))

    def ask(self, requests: list[dict]) -> dict[str, dict]:
        with self._lock:
            proc = self._ensure()
            for req in requests:
                write_frame(proc.stdin, req)
            fd = proc.stdout.fileno()
            responses: dict[str, dict] = {}
            deadline = time.monotonic() + self.timeout * max(1, len(requests))
            while len(responses) < len(requests):
                resp = self._read_response(fd, deadline)
                responses[str(resp.get("id"))] = resp
            return responses


_SUBPROCESS_POOL: dict[tuple[str, float], _SubprocessConnection] = {}


def _subprocess_conn(handle: ModelHandle) -> _SubprocessConnection:
    key = (handle.command, handle.timeout)
    if key not in _SUBPROCESS_POOL:
        _SUBPROCESS_POOL[key] = _SubprocessConnection(handle.command,
                                                      handle.timeout)
    return _SUBPROCESS_POOL[key]


def close_connections() -> None:
    for conn in _SUBPROCESS_POOL.values():
        conn.close()
    _SUBPROCESS_POOL.clear()


def _http_post(endpoint: str, payload: dict, timeout: float) -> dict:
    data = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    req = urllib.request.Request(
        endpoint, data=data, headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return json.loads(resp.read().decode("utf-8"))


def _http_chunk(handle: ModelHandle, requests: list[dict]) -> dict[str, dict]:
    with ThreadPoolExecutor(max_workers=max(1, handle.max_inflight)) as pool:
        futures = [pool.submit(_http_post, handle.endpoint, r, handle.timeout)
                   for r in requests]
        responses = {}
        for fut in futures:
            try:
                resp = fut.result()
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                raise ModelError(f"http transport failure: {exc}") from exc
            responses[str(resp.get("id"))] = resp
    return responses


_REQ_COUNTER = 0
_REQ_LOCK = threading.Lock()


def _next_ids(n: int) -> list[str]:
    global _REQ_COUNTER
    with _REQ_LOCK:
        ids = [f"q{_REQ_COUNTER + k:08d}" for k in range(n)]
        _REQ_COUNTER += n
    return ids


def _predict_chunk(handle: ModelHandle, imgs: Sequence[Image]) -> list[Prediction]:
    if handle.transport == "builtin":
        info = _BUILTINS.get(handle.name)
        if info is None:
            raise ValueError(f"unknown builtin model {handle.name!r}")
        return info["fn"](imgs)
    ids = _next_ids(len(imgs))
    requests = [encode_request(i, im) for i, im in zip(ids, imgs)]
    if handle.transport == "subprocess":
        responses = _subprocess_conn(handle).ask(requests)
    else:
        responses = _http_chunk(handle, requests)
    out = []
    for i in ids:
        if i not in responses:
            raise ModelProtocolError(f"no response for request id {i}")
        out.append(_parse_response(responses[i], handle.task))
    return out


def predict_batch(handle: ModelHandle, imgs: Sequence[Image],
                  budget: QueryBudget | None = None) -> list[Prediction]:
    """Predictions positionally aligned with imgs.  Splits into chunks of
    handle.batch_size; a failed chunk is retried once before erroring."""
    if not imgs:
        raise ValueError("predict_batch needs at least one image")
    dims = (imgs[0].dims, imgs[0].channels)
    for im in imgs:
        if (im.dims, im.channels) != dims:
            raise ValueError("all images in a batch must share dimensions")
    out: list[Prediction] = []
    for start in range(0, len(imgs), handle.batch_size):
        chunk = imgs[start:start + handle.batch_size]
        if budget is not None:
            budget.charge(len(chunk))
        try:
            out.extend(_predict_chunk(handle, chunk))
        except BudgetExhausted:
            raise
        except ModelError:
            if handle.transport == "subprocess":
                _subprocess_conn(handle).close()
            out.extend(_predict_chunk(handle, chunk))
    return out


def throughput_probe(handle: ModelHandle, imgs: Sequence[Image],
                     mode: str) -> float:
    """Wall-clock prediction throughput in images/second.  mode "batched"
    uses handle.batch_size, mode "single" forces size 1."""
    if mode not in ("single", "batched"):
        raise ValueError("mode must be 'single' or 'batched'")
    if len(imgs) < 1000:
        raise ValueError("need >= 1000 images for a stable measurement")
    size = 1 if mode == "single" else handle.batch_size
    probe = ModelHandle(transport=handle.transport, task=handle.task,
                        name=handle.name, command=handle.command,
                        endpoint=handle.endpoint, batch_size=size,
                        timeout=handle.timeout,
                        max_inflight=handle.max_inflight)
    t0 = time.perf_counter()
    predict_batch(probe, imgs)
    dt = time.perf_counter() - t0
    return len(imgs) / dt
