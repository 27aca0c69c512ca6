"""Inference wire protocol.

One endpoint: POST /infer.  Request and response both carry the protocol
version string; outputs align 1:1 with input sentences.

Request  {"protocol": "pdd-infer/1", "task": <kind>, "label_map_id": str,
          "sentences": [str, ...]}
Response {"protocol": "pdd-infer/1", "outputs": [str, ...]}
Error    HTTP 4xx/5xx with {"error": {"kind": "protocol"|"model", "message": str}}
"""

from __future__ import annotations

import json
from typing import Callable, Optional, Sequence

import httpx

from .errors import WireProtocolError

PROTOCOL = "pdd-infer/1"
TASK_KINDS = ("binary", "characteristics", "span")


def build_infer_request(task: str, label_map_id: str, sentences: Sequence[str]) -> dict:
    return {"protocol": PROTOCOL, "task": task, "label_map_id": label_map_id,
            "sentences": list(sentences)}


def validate_infer_request(body) -> tuple[str, str, list[str]]:
    """Server-side request validation; returns (task, label_map_id, sentences)."""
    if not isinstance(body, dict):
        raise WireProtocolError("request body must be a JSON object")
    protocol = body.get("protocol")
    if protocol != PROTOCOL:
        raise WireProtocolError(f"protocol version mismatch: got {protocol!r}, "
                                f"this server speaks {PROTOCOL!r}")
    task = body.get("task")
    if task not in TASK_KINDS:
        raise WireProtocolError(f"unknown task {task!r}; expected one of {TASK_KINDS}")
    label_map_id = body.get("label_map_id")
    if not isinstance(label_map_id, str) or not label_map_id:
        raise WireProtocolError("label_map_id must be a non-empty string")
    sentences = body.get("sentences")
    if not isinstance(sentences, list) or any(not isinstance(s, str) for s in sentences):
        raise WireProtocolError("sentences must be a list of strings")
    return task, label_map_id, sentences


def build_infer_response(outputs: Sequence[str]) -> dict:
    return {"protocol": PROTOCOL, "outputs": list(outputs)}


def build_error(kind: str, message: str) -> dict:
    return {"error": {"kind": kind, "message": message}}


def parse_infer_response(payload, expected_count: int) -> list[str]:
    """Client-side response validation; returns the aligned outputs."""
    if not isinstance(payload, dict):
        raise WireProtocolError("response body must be a JSON object")
    if payload.get("protocol") != PROTOCOL:
        raise WireProtocolError(f"response protocol {payload.get('protocol')!r} "
                                f"!= {PROTOCOL!r}")
    outputs = payload.get("outputs")
    if not isinstance(outputs, list) or any(not isinstance(o, str) for o in outputs):
        raise WireProtocolError("response outputs must be a list of strings")
    if len(outputs) != expected_count:
        raise WireProtocolError(f"response carries {len(outputs)} outputs "
                                f"for {expected_count} sentences")
    return outputs


class WireClient:
    """Batching client for a wire backend.

    Sends sentences in fixed-size batches; each batch is retried
    ``retries`` times after the first failed attempt, then the run fails.
    A custom ``session`` (anything with ``.post(url, json=...)``) lets
    tests drive an in-process server.
    """

    def __init__(self, base_url: str, task: str, label_map_id: str,
                 batch_size: int = 32, retries: int = 1, timeout: float = 30.0,
                 session=None):
        if task not in TASK_KINDS:
            raise WireProtocolError(f"unknown task {task!r}")
        if batch_size < 1:
            raise WireProtocolError(f"batch_size must be >= 1, got {batch_size}")
        self.base_url = base_url.rstrip("/")
        self.task = task
        self.label_map_id = label_map_id
        self.batch_size = batch_size
        self.retries = retries
        self.timeout = timeout
        self._session = session if session is not None else httpx.Client(timeout=timeout)

    def _post_batch(self, batch: list[str]) -> list[str]:
        body = build_infer_request(self.task, self.label_map_id, batch)
        attempts = self.retries + 1
        last_error: Optional[Exception] = None
        for _attempt in range(attempts):
            try:
                response = self._session.post(f"{self.base_url}/infer", json=body)
            except (httpx.HTTPError, OSError) as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                try:
                    detail = response.json()
                except json.JSONDecodeError:
                    detail = response.text
                raise WireProtocolError(f"server rejected batch "
                                        f"(HTTP {response.status_code}): {detail}")
            return parse_infer_response(response.json(), len(batch))
        raise WireProtocolError(f"batch failed after {attempts} attempts: {last_error}")

    def infer(self, sentences: Sequence[str]) -> list[str]:
        outputs: list[str] = []
        batch: list[str] = []
        for sentence in sentences:
            batch.append(sentence)
            if len(batch) == self.batch_size:
                outputs.extend(self._post_batch(batch))
                batch = []
        if batch:
            outputs.extend(self._post_batch(batch))
        return outputs


def canonical_json(payload) -> bytes:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")


def run_contract_checks(post: Callable[[dict], tuple[int, object]],
                        task: str = "binary",
                        label_map_id: str = "he-default-1") -> list[str]:
    """Protocol conformance suite shared by every server implementation.

    ``post`` sends one JSON body to the server's /infer and returns
    (status_code, decoded_json_body).  Returns a list of failure
    descriptions; an empty list means full conformance.
    """
    failures: list[str] = []

    def expect(condition: bool, label: str):
        if not condition:
            failures.append(label)

    sentences = ["אחת", "שתיים", "שלוש"]
    status, payload = post(build_infer_request(task, label_map_id, sentences))
    expect(status == 200, f"well-formed request returned HTTP {status}")
    if status == 200 and isinstance(payload, dict):
        expect(payload.get("protocol") == PROTOCOL, "response missing protocol tag")
        outputs = payload.get("outputs")
        expect(isinstance(outputs, list) and len(outputs) == 3,
               "outputs not aligned with 3 inputs")
        if isinstance(outputs, list):
            expect(all(isinstance(o, str) for o in outputs), "non-string output")
        expect(set(payload) == {"protocol", "outputs"},
               f"unexpected response fields: {sorted(payload)}")

    status, payload = post(build_infer_request(task, label_map_id, []))
    expect(status == 200 and isinstance(payload, dict) and payload.get("outputs") == [],
           "empty batch did not return empty outputs")

    status, payload = post(build_infer_request(task, label_map_id, ["א"] * 7))
    expect(status == 200 and isinstance(payload, dict)
           and isinstance(payload.get("outputs"), list)
           and len(payload["outputs"]) == 7,
           "batch of 7 not aligned")

    body = build_infer_request(task, label_map_id, ["א"])
    status_a, payload_a = post(body)
    status_b, payload_b = post(body)
    expect(status_a == status_b == 200
           and canonical_json(payload_a) == canonical_json(payload_b),
           "identical requests gave different responses")

    bad = build_infer_request(task, label_map_id, ["א"])
    bad["protocol"] = "pdd-infer/0"
    status, payload = post(bad)
    expect(status != 200, "stale protocol version was accepted")
    if isinstance(payload, dict):
        error = payload.get("error")
        expect(isinstance(error, dict) and error.get("kind") == "protocol",
               "version mismatch lacks protocol error object")
        expect(isinstance(error, dict) and PROTOCOL in str(error.get("message")),
               "version error does not name the supported version")

    for mutate, label in [
        (lambda b: b.pop("protocol"), "missing protocol accepted"),
        (lambda b: b.pop("task"), "missing task accepted"),
        (lambda b: b.__setitem__("task", "frobnicate"), "unknown task accepted"),
        (lambda b: b.__setitem__("sentences", "not-a-list"), "non-list sentences accepted"),
        (lambda b: b.__setitem__("sentences", [1, 2]), "non-string sentences accepted"),
        (lambda b: b.__setitem__("label_map_id", ""), "empty label_map_id accepted"),
    ]:
        body = build_infer_request(task, label_map_id, ["א"])
        mutate(body)
        status, payload = post(body)
        expect(status != 200, label)
        if isinstance(payload, dict):
            error = payload.get("error")
            expect(isinstance(error, dict) and error.get("kind") == "protocol"
                   and str(error.get("message")),
                   f"{label.split(' accepted')[0]} lacks protocol error object")

    return failures
