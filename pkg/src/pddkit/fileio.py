"""File formats: JSON-lines for sentences, annotations, splits, predictions;
CSV for speaker metadata; JSON for dated events.

Optional fields are omitted when absent, never written as null.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Corpus, CorpusSplit, parse_date, record_from_row
from .errors import SchemaError
from .records import (
    CHARACTERISTIC_FIELDS,
    Bloc,
    Characteristics,
    Gender,
    PddAnnotation,
    PredictionRecord,
    SentenceRecord,
    SpeakerMeta,
)


def write_jsonl(path, rows: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_jsonl(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: bad JSON: {exc}") from None


# -- sentences ---------------------------------------------------------------

def sentence_to_row(rec: SentenceRecord) -> dict:
    row = {"id": rec.id, "text": rec.text, "source": rec.source.value,
           "date": rec.date.isoformat()}
    if rec.speaker_id is not None:
        row["speaker_id"] = rec.speaker_id
    if rec.doc_id is not None:
        row["doc_id"] = rec.doc_id
    return row


def write_sentences(path, corpus: Iterable[SentenceRecord]) -> int:
    return write_jsonl(path, (sentence_to_row(r) for r in corpus))


def read_sentences(path) -> Corpus:
    corpus = Corpus()
    for row in read_jsonl(path):
        corpus.add(record_from_row(row))
    return corpus


# -- annotations -------------------------------------------------------------

def annotation_to_row(ann: PddAnnotation) -> dict:
    row = {"sentence_id": ann.sentence_id, "annotator_id": ann.annotator_id,
           "delegit": ann.delegit}
    for name in CHARACTERISTIC_FIELDS:
        value = getattr(ann, name)
        if value is not None:
            row[name] = value
    if ann.target_spans is not None:
        row["target_spans"] = [[s, e] for s, e in ann.target_spans]
    if ann.timestamp is not None:
        row["timestamp"] = ann.timestamp.isoformat()
    return row


def annotation_from_row(row: dict) -> PddAnnotation:
    known = {"sentence_id", "annotator_id", "delegit", "target_spans",
             "timestamp", *CHARACTERISTIC_FIELDS}
    extra = set(row) - known
    if extra:
        raise SchemaError(f"annotation row has unknown fields: {sorted(extra)}")
    for key in ("sentence_id", "annotator_id", "delegit"):
        if key not in row:
            raise SchemaError(f"annotation row missing {key!r}")
    spans = row.get("target_spans")
    ts = row.get("timestamp")
    return PddAnnotation(
        sentence_id=row["sentence_id"],
        annotator_id=row["annotator_id"],
        delegit=bool(row["delegit"]),
        target_spans=tuple((s, e) for s, e in spans) if spans is not None else None,
        timestamp=dt.datetime.fromisoformat(ts) if ts else None,
        **{name: row.get(name) for name in CHARACTERISTIC_FIELDS},
    )


def write_annotations(path, annotations: Iterable[PddAnnotation]) -> int:
    return write_jsonl(path, (annotation_to_row(a) for a in annotations))


def read_annotations(path) -> list[PddAnnotation]:
    return [annotation_from_row(row) for row in read_jsonl(path)]


# -- splits ------------------------------------------------------------------

def write_split(path, split: CorpusSplit) -> None:
    rows = [{"seed": split.seed, "ratios": list(split.ratios)}]
    for name in ("train", "validation", "test"):
        rows.extend({"id": sid, "split": name} for sid in getattr(split, name))
    write_jsonl(path, rows)


def read_split(path) -> CorpusSplit:
    rows = list(read_jsonl(path))
    if not rows or "seed" not in rows[0]:
        raise SchemaError(f"{path}: split file must start with a seed/ratios header")
    header, body = rows[0], rows[1:]
    parts: dict[str, list[str]] = {"train": [], "validation": [], "test": []}
    for row in body:
        name = row.get("split")
        if name not in parts:
            raise SchemaError(f"{path}: unknown split name {name!r}")
        parts[name].append(row["id"])
    ratios = header["ratios"]
    return CorpusSplit(train=tuple(parts["train"]),
                       validation=tuple(parts["validation"]),
                       test=tuple(parts["test"]),
                       seed=int(header["seed"]),
                       ratios=(ratios[0], ratios[1], ratios[2]))


# -- predictions -------------------------------------------------------------

def prediction_to_row(pred: PredictionRecord) -> dict:
    row = {"sentence_id": pred.sentence_id, "delegit": pred.delegit,
           "stage1_score": pred.stage1_score, "model_id": pred.model_id,
           "stage2_parse_ok": pred.stage2_parse_ok}
    if pred.characteristics is not None:
        c = pred.characteristics
        row["characteristics"] = {"intensity": c.intensity,
                                  **{n: getattr(c, n) for n in
                                     CHARACTERISTIC_FIELDS if n != "intensity"}}
    if pred.target_spans is not None:
        row["target_spans"] = [[s, e] for s, e in pred.target_spans]
    if pred.error is not None:
        row["error"] = pred.error
    return row


def prediction_from_row(row: dict) -> PredictionRecord:
    for key in ("sentence_id", "delegit", "stage1_score", "model_id"):
        if key not in row:
            raise SchemaError(f"prediction row missing {key!r}")
    chars = None
    if "characteristics" in row:
        c = row["characteristics"]
        chars = Characteristics(intensity=c["intensity"],
                                **{n: bool(c[n]) for n in
                                   CHARACTERISTIC_FIELDS if n != "intensity"})
    spans = row.get("target_spans")
    return PredictionRecord(
        sentence_id=row["sentence_id"],
        delegit=bool(row["delegit"]),
        stage1_score=float(row["stage1_score"]),
        model_id=row["model_id"],
        characteristics=chars,
        target_spans=tuple((s, e) for s, e in spans) if spans is not None else None,
        stage2_parse_ok=bool(row.get("stage2_parse_ok", True)),
        error=row.get("error"),
    )


def write_predictions(path, preds: Iterable[PredictionRecord]) -> int:
    return write_jsonl(path, (prediction_to_row(p) for p in preds))


def read_predictions(path) -> list[PredictionRecord]:
    return [prediction_from_row(row) for row in read_jsonl(path)]


# -- speaker metadata --------------------------------------------------------

SPEAKER_COLUMNS = ("speaker_id", "name", "gender", "bloc", "party", "coalition_intervals")


def _intervals_to_text(intervals) -> str:
    parts = []
    for start, end in intervals:
        parts.append(f"{start.isoformat()}/{end.isoformat() if end else ''}")
    return ";".join(parts)


def _intervals_from_text(text: str):
    intervals = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "/" not in part:
            raise SchemaError(f"bad coalition interval {part!r}; expected start/end")
        start_s, end_s = part.split("/", 1)
        start = parse_date(start_s)
        end = parse_date(end_s) if end_s.strip() else None
        intervals.append((start, end))
    return tuple(intervals)


def write_speakers(path, speakers: Iterable[SpeakerMeta]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPEAKER_COLUMNS)
        for sp in speakers:
            writer.writerow([sp.speaker_id, sp.name, sp.gender.value, sp.bloc.value,
                             sp.party, _intervals_to_text(sp.coalition_intervals)])
            n += 1
    return n


def read_speakers(path) -> dict[str, SpeakerMeta]:
    out: dict[str, SpeakerMeta] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if not row.get("speaker_id"):
                raise SchemaError(f"{path}: speaker row missing speaker_id")
            sp = SpeakerMeta(
                speaker_id=row["speaker_id"],
                name=row.get("name") or "",
                gender=Gender(row.get("gender") or "unknown"),
                bloc=Bloc(row.get("bloc") or "unknown"),
                party=row.get("party") or "",
                coalition_intervals=_intervals_from_text(row.get("coalition_intervals") or ""),
            )
            if sp.speaker_id in out:
                raise SchemaError(f"{path}: duplicate speaker {sp.speaker_id!r}")
            out[sp.speaker_id] = sp
    return out


# -- dated events ------------------------------------------------------------

EVENT_KINDS = ("election", "government", "other")


def read_events(path) -> list[dict]:
    """Events config: JSON list of {name, date, kind}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError(f"{path}: events file must be a JSON list")
    events = []
    for item in data:
        kind = item.get("kind", "other")
        if kind not in EVENT_KINDS:
            raise SchemaError(f"{path}: unknown event kind {kind!r}")
        if "name" not in item or "date" not in item:
            raise SchemaError(f"{path}: event needs name and date")
        events.append({"name": item["name"], "date": parse_date(item["date"]),
                       "kind": kind})
    return sorted(events, key=lambda e: e["date"])


def ensure_parent(path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p
