"""HTTP annotation service.

Endpoints:
  GET  /tasks/next?annotator=ID   next task for an annotator, null when done
  POST /annotations               submit one annotation record
  GET  /agreement                 pairwise agreement report
  GET  /adjudication/queue        sentences with conflicting submissions
  POST /adjudication/{sentence_id}?adjudicator=ID   write gold record

Bodies use the same record schema as the annotation files: optional fields
omitted, never null.  Validation failures map to 422, unknown annotators
or sentences to 404.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .agreement import AgreementReport
from .errors import DataError, PddError, SchemaError, UnknownAnnotatorError
from .fileio import annotation_from_row, annotation_to_row
from .workflow import AnnotationTask, AnnotationWorkflow, GoldRecord


def _task_payload(task: Optional[AnnotationTask]):
    if task is None:
        return None
    return {"sentence_id": task.sentence_id, "assigned_to": task.assigned_to,
            "status": task.status.value, "text": task.text, "shared": task.shared}


def _gold_payload(gold: GoldRecord) -> dict:
    return {"sentence_id": gold.sentence_id,
            "final": annotation_to_row(gold.final),
            "adjudicator_id": gold.adjudicator_id,
            "provenance": gold.provenance.value}


def _agreement_payload(report: AgreementReport) -> dict:
    pairs = []
    for (a, b), kappa in sorted(report.kappa.items()):
        pairs.append({"a": a, "b": b, "kappa": kappa,
                      "correlation": report.correlation.get((a, b)),
                      "n": report.pair_counts.get((a, b), 0)})
    return {"annotators": list(report.annotators),
            "pairs": pairs,
            "avg_kappa": report.avg_kappa,
            "avg_correlation": report.avg_correlation,
            "n_shared": report.n_shared,
            "disagreements": list(report.disagreements)}


def create_app(workflow: AnnotationWorkflow) -> FastAPI:
    app = FastAPI(title="annotation service")

    @app.exception_handler(PddError)
    async def _pdd_error(_request: Request, exc: PddError):
        not_found = isinstance(exc, UnknownAnnotatorError) or "unknown sentence" in str(exc)
        return JSONResponse(status_code=404 if not_found else 422,
                            content={"detail": str(exc)})

    @app.get("/tasks/next")
    async def next_task(annotator: str = Query(...)):
        return _task_payload(workflow.next_task(annotator))

    @app.post("/annotations")
    async def submit(request: Request):
        row = await request.json()
        if not isinstance(row, dict):
            raise SchemaError("annotation body must be a JSON object")
        annotation = annotation_from_row(row)
        ack = workflow.submit_annotation(annotation.annotator_id, annotation)
        return {"sentence_id": ack.sentence_id, "annotator_id": ack.annotator_id,
                "version": ack.version}

    @app.get("/agreement")
    async def agreement():
        try:
            return _agreement_payload(workflow.agreement())
        except DataError as exc:
            return {"annotators": list(workflow.annotators()), "pairs": [],
                    "avg_kappa": None, "avg_correlation": None, "n_shared": 0,
                    "disagreements": [], "empty": str(exc)}

    @app.get("/adjudication/queue")
    async def adjudication_queue():
        return workflow.adjudication_queue()

    @app.post("/adjudication/{sentence_id}")
    async def adjudicate(sentence_id: str, request: Request,
                         adjudicator: str = Query(...)):
        row = await request.json()
        if not isinstance(row, dict):
            raise SchemaError("adjudication body must be a JSON object")
        final = annotation_from_row(row)
        gold = workflow.adjudicate(sentence_id, final, adjudicator)
        return _gold_payload(gold)

    @app.get("/gold")
    async def gold():
        return [_gold_payload(g) for g in workflow.gold_records()]

    return app
