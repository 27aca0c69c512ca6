"""Classifier backends: the pluggable inference slots of the two-stage
pipeline, plus mocks, a scripted fixture backend, a call-counting wrapper,
and a reference HTTP server exposing any backend over the wire protocol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .codecs import encode_stage1_target, encode_stage2_target
from .spans import render_span_markup
from .errors import SchemaError, WireProtocolError
from .labelmap import LabelMap
from .records import Characteristics
from .wire import (
    PROTOCOL,
    WireClient,
    build_error,
    build_infer_response,
    validate_infer_request,
)


class BackendKind(str, Enum):
    BINARY = "binary"
    CHARACTERISTICS = "characteristics"
    SPAN = "span"


class Transport(str, Enum):
    IN_PROCESS = "in-process"
    WIRE = "wire"


@dataclass(frozen=True)
class BackendDescriptor:
    id: str
    kind: BackendKind
    transport: Transport
    label_map_id: str


class FunctionBackend:
    """Backend defined by a per-sentence function."""

    def __init__(self, descriptor: BackendDescriptor, fn: Callable[[str], str]):
        self.descriptor = descriptor
        self._fn = fn

    def infer(self, sentences: Sequence[str]) -> list[str]:
        return [self._fn(s) for s in sentences]


class ScriptedBackend:
    """Backend that replays a fixture mapping input text to output text."""

    def __init__(self, descriptor: BackendDescriptor, script: Mapping[str, str],
                 default: Optional[str] = None):
        self.descriptor = descriptor
        self._script = dict(script)
        self._default = default

    def infer(self, sentences: Sequence[str]) -> list[str]:
        outputs = []
        for s in sentences:
            if s in self._script:
                outputs.append(self._script[s])
            elif self._default is not None:
                outputs.append(self._default)
            else:
                raise SchemaError(f"scripted backend has no output for {s!r}")
        return outputs


class CountingBackend:
    """Wrapper counting calls and sentences; used for gating assertions
    and for the per-run call log."""

    def __init__(self, inner):
        self.inner = inner
        self.descriptor = inner.descriptor
        self.calls = 0
        self.sentences_seen = 0

    def infer(self, sentences: Sequence[str]) -> list[str]:
        self.calls += 1
        self.sentences_seen += len(sentences)
        return self.inner.infer(sentences)

    def infer_scores(self, sentences: Sequence[str]) -> list[float]:
        if not hasattr(self.inner, "infer_scores"):
            raise AttributeError("inner backend has no infer_scores")
        self.calls += 1
        self.sentences_seen += len(sentences)
        return self.inner.infer_scores(sentences)

    def __getattr__(self, name):
        return getattr(self.inner, name)


class WireBackend:
    """Backend living behind a wire endpoint."""

    def __init__(self, descriptor: BackendDescriptor, client: WireClient):
        self.descriptor = descriptor
        self._client = client

    def infer(self, sentences: Sequence[str]) -> list[str]:
        return self._client.infer(sentences)


def mock_backend(kind: BackendKind, behavior: str, label_map: LabelMap):
    """Deterministic mock backends.

    binary: all-true | all-false | echo;  characteristics: zero | <json>;
    span: echo (identity markup, i.e. zero spans).
    """
    descriptor = BackendDescriptor(id=f"mock:{behavior}", kind=kind,
                                   transport=Transport.IN_PROCESS,
                                   label_map_id=label_map.id)
    if kind is BackendKind.BINARY:
        if behavior == "all-true":
            token = encode_stage1_target(True, label_map)
            return FunctionBackend(descriptor, lambda s: token)
        if behavior == "all-false":
            token = encode_stage1_target(False, label_map)
            return FunctionBackend(descriptor, lambda s: token)
        if behavior == "echo":
            return FunctionBackend(descriptor, lambda s: s)
    elif kind is BackendKind.CHARACTERISTICS:
        if behavior == "zero":
            target = encode_stage2_target(Characteristics.zeros(), label_map)
            return FunctionBackend(descriptor, lambda s: target)
        if behavior.startswith("{"):
            return FunctionBackend(descriptor, lambda s, out=behavior: out)
    elif kind is BackendKind.SPAN:
        if behavior == "echo":
            return FunctionBackend(descriptor, lambda s: s)
        if behavior == "mark-all":
            return FunctionBackend(
                descriptor,
                lambda s: render_span_markup(s, [(0, len(s))]) if s else s)
    raise SchemaError(f"no mock behavior {behavior!r} for kind {kind.value}")


def make_backend(spec: str, kind: BackendKind, label_map: LabelMap,
                 session=None):
    """Build a backend from a spec string.

    mock:<behavior> | script:<fixture.json> | baseline:<model-file> |
    wire:<base-url>
    """
    scheme, _, rest = spec.partition(":")
    if scheme == "mock":
        return mock_backend(kind, rest, label_map)
    if scheme == "script":
        with open(rest, encoding="utf-8") as fh:
            script = json.load(fh)
        if not isinstance(script, dict):
            raise SchemaError(f"{rest}: scripted fixture must be a JSON object")
        default = script.pop("*", None)
        descriptor = BackendDescriptor(id=f"script:{rest}", kind=kind,
                                       transport=Transport.IN_PROCESS,
                                       label_map_id=label_map.id)
        return ScriptedBackend(descriptor, script, default)
    if scheme == "baseline":
        from .baseline import load_model, model_backend
        return model_backend(load_model(rest), kind, label_map)
    if scheme == "wire":
        client = WireClient(rest, task=kind.value, label_map_id=label_map.id,
                            session=session)
        descriptor = BackendDescriptor(id=f"wire:{rest}", kind=kind,
                                       transport=Transport.WIRE,
                                       label_map_id=label_map.id)
        return WireBackend(descriptor, client)
    raise SchemaError(f"unknown backend spec {spec!r}; expected "
                      "mock:|script:|baseline:|wire:")


def create_wire_app(backends: Mapping[str, object]):
    """Reference wire server: one /infer endpoint over in-process backends.

    ``backends`` maps task kind ("binary"/"characteristics"/"span") to a
    backend.  Protocol violations return 400 with a protocol error object;
    backend exceptions return 500 with a model error object.
    """
    app = FastAPI(title="inference backend")

    @app.post("/infer")
    async def infer(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse(status_code=400,
                                content=build_error("protocol", "body is not JSON"))
        try:
            task, _label_map_id, sentences = validate_infer_request(body)
        except WireProtocolError as exc:
            return JSONResponse(status_code=400,
                                content=build_error("protocol", str(exc)))
        backend = backends.get(task)
        if backend is None:
            return JSONResponse(
                status_code=400,
                content=build_error("protocol",
                                    f"no backend configured for task {task!r}"))
        try:
            outputs = backend.infer(sentences)
        except Exception as exc:
            return JSONResponse(status_code=500,
                                content=build_error("model", str(exc)))
        return build_infer_response(outputs)

    @app.get("/healthz")
    async def healthz():
        return {"protocol": PROTOCOL, "tasks": sorted(backends)}

    return app
