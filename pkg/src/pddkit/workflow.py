"""Multi-annotator workflow: task assignment with a shared reliability
sample served first, versioned submissions, and gold adjudication.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .agreement import AgreementReport, agreement_report
from .errors import DataError, SchemaError, UnknownAnnotatorError
from .records import PddAnnotation, SentenceRecord


class TaskStatus(str, Enum):
    PENDING = "pending"
    SUBMITTED = "submitted"
    ADJUDICATED = "adjudicated"


class GoldProvenance(str, Enum):
    UNANIMOUS = "unanimous"
    MAJORITY = "majority"
    ADJUDICATED = "adjudicated"


@dataclass(frozen=True)
class AnnotationTask:
    sentence_id: str
    assigned_to: str
    status: TaskStatus
    text: str
    shared: bool


@dataclass(frozen=True)
class SubmissionAck:
    sentence_id: str
    annotator_id: str
    version: int


@dataclass(frozen=True)
class GoldRecord:
    sentence_id: str
    final: PddAnnotation
    adjudicator_id: str
    provenance: GoldProvenance


class AnnotationWorkflow:
    """Server-side state for an annotation round.

    Every registered annotator can annotate every sentence; sentences in
    the shared sample are handed out before the rest.  A handed-out task
    stays held for its annotator until submitted, so repeated calls to
    ``next_task`` are idempotent.
    """

    def __init__(self, sentences: Iterable[SentenceRecord],
                 annotators: Iterable[str] = (),
                 shared_sample: Iterable[str] = ()):
        self._lock = threading.RLock()
        self._sentences: dict[str, SentenceRecord] = {}
        for rec in sentences:
            if rec.id in self._sentences:
                raise SchemaError(f"duplicate sentence id {rec.id!r}")
            self._sentences[rec.id] = rec
        self._shared = set(shared_sample)
        unknown = self._shared - set(self._sentences)
        if unknown:
            raise SchemaError(f"shared sample references unknown sentences: "
                              f"{sorted(unknown)[:3]}")
        self._annotators: set[str] = set()
        # Submission history per (annotator, sentence); current value is last.
        self._history: dict[tuple[str, str], list[PddAnnotation]] = {}
        self._held: dict[str, str] = {}
        self._gold: dict[str, GoldRecord] = {}
        for annotator in annotators:
            self.register_annotator(annotator)
        # Shared items first, each block in insertion order.
        self._order = ([sid for sid in self._sentences if sid in self._shared]
                       + [sid for sid in self._sentences if sid not in self._shared])

    def register_annotator(self, annotator_id: str) -> None:
        if not annotator_id:
            raise SchemaError("annotator id must be non-empty")
        with self._lock:
            self._annotators.add(annotator_id)

    def _require_annotator(self, annotator_id: str) -> None:
        if annotator_id not in self._annotators:
            raise UnknownAnnotatorError(f"unknown annotator {annotator_id!r}")

    def _task(self, sentence_id: str, annotator_id: str) -> AnnotationTask:
        if sentence_id in self._gold:
            status = TaskStatus.ADJUDICATED
        elif (annotator_id, sentence_id) in self._history:
            status = TaskStatus.SUBMITTED
        else:
            status = TaskStatus.PENDING
        return AnnotationTask(sentence_id=sentence_id, assigned_to=annotator_id,
                              status=status, text=self._sentences[sentence_id].text,
                              shared=sentence_id in self._shared)

    def next_task(self, annotator_id: str) -> Optional[AnnotationTask]:
        with self._lock:
            self._require_annotator(annotator_id)
            held = self._held.get(annotator_id)
            if held is not None and (annotator_id, held) not in self._history:
                return self._task(held, annotator_id)
            for sid in self._order:
                if (annotator_id, sid) not in self._history:
                    self._held[annotator_id] = sid
                    return self._task(sid, annotator_id)
            return None

    def submit_annotation(self, annotator_id: str, annotation: PddAnnotation) -> SubmissionAck:
        with self._lock:
            self._require_annotator(annotator_id)
            if annotation.annotator_id != annotator_id:
                raise SchemaError(f"annotation carries annotator {annotation.annotator_id!r} "
                                  f"but was submitted by {annotator_id!r}")
            record = self._sentences.get(annotation.sentence_id)
            if record is None:
                raise SchemaError(f"unknown sentence {annotation.sentence_id!r}")
            annotation.validate_against_text(len(record.text))
            key = (annotator_id, annotation.sentence_id)
            self._history.setdefault(key, []).append(annotation)
            if self._held.get(annotator_id) == annotation.sentence_id:
                del self._held[annotator_id]
            self._maybe_promote(annotation.sentence_id)
            return SubmissionAck(annotation.sentence_id, annotator_id,
                                 version=len(self._history[key]))

    def submissions(self, sentence_id: str) -> list[PddAnnotation]:
        """Current (latest-version) submissions for one sentence."""
        with self._lock:
            return [history[-1] for (annotator, sid), history in self._history.items()
                    if sid == sentence_id]

    def history(self, annotator_id: str, sentence_id: str) -> list[PddAnnotation]:
        return list(self._history.get((annotator_id, sentence_id), ()))

    def current_annotations(self) -> list[PddAnnotation]:
        with self._lock:
            return [history[-1] for history in self._history.values()]

    def _maybe_promote(self, sentence_id: str) -> None:
        existing = self._gold.get(sentence_id)
        if existing is not None and existing.provenance is GoldProvenance.ADJUDICATED:
            return
        subs = self.submissions(sentence_id)
        if len(subs) < 2:
            if existing is not None:
                del self._gold[sentence_id]
            return
        keys = {s.content_key() for s in subs}
        if len(keys) == 1:
            self._gold[sentence_id] = GoldRecord(sentence_id, subs[0], "",
                                                 GoldProvenance.UNANIMOUS)
        elif existing is not None:
            del self._gold[sentence_id]

    def adjudicate(self, sentence_id: str, final: PddAnnotation,
                   adjudicator_id: str) -> GoldRecord:
        with self._lock:
            if sentence_id not in self._sentences:
                raise SchemaError(f"unknown sentence {sentence_id!r}")
            if final.sentence_id != sentence_id:
                raise SchemaError(f"final annotation is for {final.sentence_id!r}, "
                                  f"not {sentence_id!r}")
            if not self.submissions(sentence_id):
                raise DataError(f"sentence {sentence_id!r} has no submissions to adjudicate")
            final.validate_against_text(len(self._sentences[sentence_id].text))
            record = GoldRecord(sentence_id, final, adjudicator_id,
                                GoldProvenance.ADJUDICATED)
            self._gold[sentence_id] = record
            return record

    def promote_majority(self, sentence_id: str) -> GoldRecord:
        """Promote the strict-majority label content to gold.

        Useful for odd submission counts; ties raise and must be
        adjudicated instead.
        """
        with self._lock:
            subs = self.submissions(sentence_id)
            if not subs:
                raise DataError(f"sentence {sentence_id!r} has no submissions")
            tallies: dict = {}
            for sub in subs:
                tallies.setdefault(sub.content_key(), []).append(sub)
            best = max(tallies.values(), key=len)
            if len(best) * 2 <= len(subs):
                raise DataError(f"no strict majority for sentence {sentence_id!r}; adjudicate")
            provenance = (GoldProvenance.UNANIMOUS if len(best) == len(subs) and len(subs) >= 2
                          else GoldProvenance.MAJORITY)
            record = GoldRecord(sentence_id, best[0], "", provenance)
            existing = self._gold.get(sentence_id)
            if existing is None or existing.provenance is not GoldProvenance.ADJUDICATED:
                self._gold[sentence_id] = record
            return self._gold[sentence_id]

    def gold_records(self) -> list[GoldRecord]:
        with self._lock:
            return [self._gold[sid] for sid in self._sentences if sid in self._gold]

    def gold_annotations(self) -> list[PddAnnotation]:
        return [g.final for g in self.gold_records()]

    def adjudication_queue(self) -> list[str]:
        """Sentences with conflicting submissions and no adjudicated gold."""
        with self._lock:
            out = []
            for sid in self._sentences:
                gold = self._gold.get(sid)
                if gold is not None:
                    continue
                keys = {s.content_key() for s in self.submissions(sid)}
                if len(keys) > 1:
                    out.append(sid)
            return out

    def agreement(self) -> AgreementReport:
        with self._lock:
            return agreement_report(self.current_annotations())

    def shared_sample(self) -> tuple[str, ...]:
        return tuple(sid for sid in self._order if sid in self._shared)

    def annotators(self) -> tuple[str, ...]:
        return tuple(sorted(self._annotators))

    def sentence(self, sentence_id: str) -> SentenceRecord:
        try:
            return self._sentences[sentence_id]
        except KeyError:
            raise SchemaError(f"unknown sentence {sentence_id!r}") from None
