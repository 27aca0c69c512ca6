"""HTTP annotation service endpoints."""

import datetime as dt

import pytest

pytest.importorskip("fastapi")
from fastapi.testclient import TestClient

from pddkit import AnnotationWorkflow, SentenceRecord
from pddkit.service import create_app


def sent(i):
    return SentenceRecord(id=f"s{i}", text="משפט מספר " + str(i),
                          source="facebook", date=dt.date(2021, 3, 1),
                          speaker_id=f"p{i}")


def row(sid, who, delegit=False, **kw):
    body = {"sentence_id": sid, "annotator_id": who, "delegit": delegit}
    body.update(kw)
    return body


@pytest.fixture()
def client():
    flow = AnnotationWorkflow([sent(i) for i in range(4)],
                              annotators=("a", "b"), shared_sample=("s1",))
    return TestClient(create_app(flow))


class TestTasks:

    def test_next_task_shared_first(self, client):
        task = client.get("/tasks/next", params={"annotator": "a"}).json()
        assert task["sentence_id"] == "s1"
        assert task["shared"] is True
        assert task["status"] == "pending"
        assert task["assigned_to"] == "a"
        assert task["text"].startswith("משפט")

    def test_null_when_exhausted(self, client):
        for _ in range(4):
            task = client.get("/tasks/next", params={"annotator": "a"}).json()
            resp = client.post("/annotations", json=row(task["sentence_id"], "a"))
            assert resp.status_code == 200
        final = client.get("/tasks/next", params={"annotator": "a"})
        assert final.status_code == 200
        assert final.json() is None

    def test_unknown_annotator_404(self, client):
        resp = client.get("/tasks/next", params={"annotator": "ghost"})
        assert resp.status_code == 404
        assert "ghost" in resp.json()["detail"]

    def test_missing_query_param_422(self, client):
        assert client.get("/tasks/next").status_code == 422


class TestSubmission:

    def test_submit_returns_version(self, client):
        resp = client.post("/annotations", json=row("s0", "a"))
        assert resp.status_code == 200
        assert resp.json() == {"sentence_id": "s0", "annotator_id": "a",
                               "version": 1}
        again = client.post("/annotations", json=row(
            "s0", "a", True, intensity=1, incivility=True))
        assert again.json()["version"] == 2

    def test_positive_row_with_fields(self, client):
        body = row("s0", "a", True, intensity=2, incivility=True,
                   person=True, target_spans=[[0, 4]])
        assert client.post("/annotations", json=body).status_code == 200

    def test_gating_violation_422(self, client):
        body = row("s0", "a", False)
        body["intensity"] = 1
        resp = client.post("/annotations", json=body)
        assert resp.status_code == 422
        assert "delegit" in resp.json()["detail"]

    def test_unknown_field_422(self, client):
        body = row("s0", "a")
        body["mystery"] = 1
        assert client.post("/annotations", json=body).status_code == 422

    def test_unknown_sentence_404(self, client):
        assert client.post("/annotations", json=row("zzz", "a")).status_code == 404

    def test_non_object_body_422(self, client):
        assert client.post("/annotations", json=[1, 2]).status_code == 422

    def test_span_beyond_text_422(self, client):
        body = row("s0", "a", True, intensity=1, incivility=True,
                   target_spans=[[0, 9999]])
        assert client.post("/annotations", json=body).status_code == 422


class TestAgreementEndpoint:

    def test_empty_report_placeholder(self, client):
        resp = client.get("/agreement")
        assert resp.status_code == 200
        body = resp.json()
        assert body["pairs"] == []
        assert body["avg_kappa"] is None
        assert "empty" in body

    def test_report_after_shared_round(self, client):
        la = [True, True, False, True]
        lb = [True, True, False, False]
        for i, (va, vb) in enumerate(zip(la, lb)):
            kw_a = dict(intensity=1, incivility=True) if va else {}
            kw_b = dict(intensity=1, incivility=True) if vb else {}
            client.post("/annotations", json=row(f"s{i}", "a", va, **kw_a))
            client.post("/annotations", json=row(f"s{i}", "b", vb, **kw_b))
        body = client.get("/agreement").json()
        assert body["annotators"] == ["a", "b"]
        (pair,) = body["pairs"]
        assert pair["a"] == "a" and pair["b"] == "b" and pair["n"] == 4
        assert body["n_shared"] == 4
        assert body["disagreements"] == ["s3"]
        assert body["avg_kappa"] == pytest.approx(pair["kappa"])


class TestAdjudication:

    def prime_conflict(self, client, sid="s0"):
        client.post("/annotations", json=row(sid, "a", False))
        client.post("/annotations", json=row(sid, "b", True, intensity=1,
                                             incivility=True))

    def test_queue_lists_conflicts(self, client):
        self.prime_conflict(client)
        assert client.get("/adjudication/queue").json() == ["s0"]

    def test_adjudicate_writes_gold(self, client):
        self.prime_conflict(client)
        resp = client.post("/adjudication/s0", params={"adjudicator": "adj"},
                           json=row("s0", "adj", False))
        assert resp.status_code == 200
        body = resp.json()
        assert body["provenance"] == "adjudicated"
        assert body["adjudicator_id"] == "adj"
        assert body["final"]["delegit"] is False
        assert client.get("/adjudication/queue").json() == []
        golds = client.get("/gold").json()
        assert [g["sentence_id"] for g in golds] == ["s0"]

    def test_adjudicate_without_submissions_422(self, client):
        resp = client.post("/adjudication/s0", params={"adjudicator": "adj"},
                           json=row("s0", "adj", False))
        assert resp.status_code == 422

    def test_adjudicate_unknown_sentence_404(self, client):
        resp = client.post("/adjudication/zzz", params={"adjudicator": "adj"},
                           json=row("zzz", "adj", False))
        assert resp.status_code == 404

    def test_mismatched_body_id_422(self, client):
        self.prime_conflict(client)
        resp = client.post("/adjudication/s0", params={"adjudicator": "adj"},
                           json=row("s1", "adj", False))
        assert resp.status_code == 422

    def test_unanimous_gold_appears_without_adjudication(self, client):
        client.post("/annotations", json=row("s2", "a", False))
        client.post("/annotations", json=row("s2", "b", False))
        golds = client.get("/gold").json()
        assert [g["provenance"] for g in golds] == ["unanimous"]
