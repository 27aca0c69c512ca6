"""Wire protocol: builders, validators, batching client, contract suite."""

import pytest

import httpx

from pddkit import (
    PROTOCOL,
    DEFAULT_LABEL_MAP,
    WireClient,
    WireProtocolError,
    build_error,
    build_infer_request,
    build_infer_response,
    parse_infer_response,
    run_contract_checks,
    validate_infer_request,
)

LM = DEFAULT_LABEL_MAP


class TestRequestValidation:

    def good(self):
        return build_infer_request("binary", LM.id, ["א", "ב"])

    def test_round_trip(self):
        task, lm, sentences = validate_infer_request(self.good())
        assert task == "binary"
        assert lm == LM.id
        assert sentences == ["א", "ב"]

    def test_version_mismatch_names_both_versions(self):
        body = self.good()
        body["protocol"] = "pdd-infer/0"
        with pytest.raises(WireProtocolError) as err:
            validate_infer_request(body)
        assert "pdd-infer/0" in str(err.value)
        assert PROTOCOL in str(err.value)

    def test_missing_protocol(self):
        body = self.good()
        del body["protocol"]
        with pytest.raises(WireProtocolError):
            validate_infer_request(body)

    def test_unknown_task(self):
        body = self.good()
        body["task"] = "frobnicate"
        with pytest.raises(WireProtocolError):
            validate_infer_request(body)

    def test_empty_label_map_id(self):
        body = self.good()
        body["label_map_id"] = ""
        with pytest.raises(WireProtocolError):
            validate_infer_request(body)

    def test_sentences_must_be_string_list(self):
        for bad in ("not-a-list", [1, 2], [None], {"a": 1}):
            body = self.good()
            body["sentences"] = bad
            with pytest.raises(WireProtocolError):
                validate_infer_request(body)

    def test_non_object_body(self):
        with pytest.raises(WireProtocolError):
            validate_infer_request([1, 2, 3])

    def test_empty_batch_is_legal(self):
        body = build_infer_request("span", LM.id, [])
        assert validate_infer_request(body)[2] == []


class TestResponseParsing:

    def test_round_trip(self):
        payload = build_infer_response(["x", "y"])
        assert payload == {"protocol": PROTOCOL, "outputs": ["x", "y"]}
        assert parse_infer_response(payload, 2) == ["x", "y"]

    def test_count_mismatch(self):
        with pytest.raises(WireProtocolError) as err:
            parse_infer_response(build_infer_response(["x"]), 2)
        assert "1" in str(err.value) and "2" in str(err.value)

    def test_wrong_protocol(self):
        payload = build_infer_response(["x"])
        payload["protocol"] = "other/9"
        with pytest.raises(WireProtocolError):
            parse_infer_response(payload, 1)

    def test_non_string_outputs(self):
        payload = build_infer_response([])
        payload["outputs"] = [1]
        with pytest.raises(WireProtocolError):
            parse_infer_response(payload, 1)

    def test_error_shape(self):
        err = build_error("protocol", "nope")
        assert err == {"error": {"kind": "protocol", "message": "nope"}}


class FakeResponse:
    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload
        self.text = str(payload)

    def json(self):
        return self._payload


class FakeSession:
    """In-memory .post() stub; fails the first ``fail_first`` attempts."""

    def __init__(self, fail_first=0, status_code=200, echo=True):
        self.fail_first = fail_first
        self.status_code = status_code
        self.echo = echo
        self.attempts = 0
        self.batches = []

    def post(self, url, json=None):
        self.attempts += 1
        if self.attempts <= self.fail_first:
            raise httpx.ConnectError("connection refused")
        sentences = json["sentences"]
        self.batches.append(list(sentences))
        if self.status_code != 200:
            return FakeResponse(self.status_code,
                                build_error("model", "boom"))
        return FakeResponse(200, build_infer_response([s for s in sentences]))


class TestWireClient:

    def make(self, session, **kw):
        kw.setdefault("batch_size", 8)
        return WireClient("http://backend", task="binary", label_map_id=LM.id,
                          session=session, **kw)

    def test_batch_split(self):
        session = FakeSession()
        client = self.make(session)
        out = client.infer([f"s{i}" for i in range(20)])
        assert out == [f"s{i}" for i in range(20)]
        assert [len(b) for b in session.batches] == [8, 8, 4]

    def test_exact_multiple_no_empty_tail(self):
        session = FakeSession()
        self.make(session).infer(["x"] * 16)
        assert [len(b) for b in session.batches] == [8, 8]

    def test_empty_input_no_calls(self):
        session = FakeSession()
        assert self.make(session).infer([]) == []
        assert session.attempts == 0

    def test_one_retry_recovers(self):
        session = FakeSession(fail_first=1)
        out = self.make(session, retries=1).infer(["א", "ב"])
        assert out == ["א", "ב"]
        assert session.attempts == 2

    def test_retries_exhausted(self):
        session = FakeSession(fail_first=99)
        client = self.make(session, retries=1)
        with pytest.raises(WireProtocolError) as err:
            client.infer(["א"])
        assert session.attempts == 2
        assert "2 attempts" in str(err.value)

    def test_server_rejection_not_retried(self):
        session = FakeSession(status_code=400)
        client = self.make(session, retries=3)
        with pytest.raises(WireProtocolError) as err:
            client.infer(["א"])
        assert session.attempts == 1
        assert "400" in str(err.value)

    def test_misaligned_response_rejected(self):
        class ShortSession(FakeSession):
            def post(self, url, json=None):
                return FakeResponse(200, build_infer_response([]))

        client = self.make(ShortSession())
        with pytest.raises(WireProtocolError):
            client.infer(["א"])

    def test_bad_task_rejected_on_construction(self):
        with pytest.raises(WireProtocolError):
            WireClient("http://x", task="frobnicate", label_map_id=LM.id)

    def test_bad_batch_size_rejected(self):
        with pytest.raises(WireProtocolError):
            WireClient("http://x", task="binary", label_map_id=LM.id,
                       batch_size=0, session=FakeSession())


class TestContractSuite:

    def test_reference_server_conforms(self):
        pytest.importorskip("fastapi")
        from fastapi.testclient import TestClient
        from pddkit import BackendKind, create_wire_app, mock_backend

        app = create_wire_app({
            "binary": mock_backend(BackendKind.BINARY, "all-false", LM),
            "characteristics": mock_backend(BackendKind.CHARACTERISTICS, "zero", LM),
            "span": mock_backend(BackendKind.SPAN, "echo", LM),
        })
        client = TestClient(app)

        def post(body):
            resp = client.post("/infer", json=body)
            return resp.status_code, resp.json()

        for task in ("binary", "characteristics", "span"):
            assert run_contract_checks(post, task=task, label_map_id=LM.id) == []

    def test_suite_flags_permissive_server(self):
        # A server that answers 200 to anything must fail several checks,
        # among them the stale-protocol rejection.
        def post(body):
            return 200, build_infer_response(["x"] * len(body.get("sentences", [])))

        failures = run_contract_checks(post)
        assert any("stale protocol" in f for f in failures)
        assert any("task" in f for f in failures)

    def test_suite_flags_misaligned_server(self):
        def post(body):
            try:
                validate_infer_request(body)
            except WireProtocolError as exc:
                return 400, build_error("protocol", str(exc))
            return 200, build_infer_response(["x"])

        failures = run_contract_checks(post)
        assert any("aligned" in f for f in failures)
