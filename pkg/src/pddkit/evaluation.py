"""Evaluation metrics for the three pipeline tasks: binary detection,
characteristics classification, and span target extraction.

All reported values are rounded half-to-even at three decimals; the raw
fractions are kept alongside for exact downstream arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DataError, SchemaError
from .records import (
    CHARACTERISTIC_FIELDS,
    Characteristics,
    PddAnnotation,
    PredictionRecord,
    Span,
)
from .spans import trim_spans

ROUND_DIGITS = 3


def round3(value: float) -> float:
    return round(value, ROUND_DIGITS)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean used everywhere a row F1 is derived from P and R."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class BinaryMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def rounded(self) -> dict[str, float]:
        return {"accuracy": round3(self.accuracy), "precision": round3(self.precision),
                "recall": round3(self.recall), "f1": round3(self.f1)}


def binary_metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> BinaryMetrics:
    n = tp + fp + fn + tn
    if n == 0:
        raise DataError("empty evaluation set")
    precision, recall, f1 = _prf(tp, fp, fn)
    return BinaryMetrics(tp=tp, fp=fp, fn=fn, tn=tn,
                         accuracy=(tp + tn) / n, precision=precision,
                         recall=recall, f1=f1)


def _align(predictions: Iterable[PredictionRecord],
           gold: Iterable[PddAnnotation]) -> list[tuple[PredictionRecord, PddAnnotation]]:
    pred_by_id: dict[str, PredictionRecord] = {}
    for p in predictions:
        if p.sentence_id in pred_by_id:
            raise SchemaError(f"duplicate prediction for {p.sentence_id!r}")
        pred_by_id[p.sentence_id] = p
    gold_by_id: dict[str, PddAnnotation] = {}
    for g in gold:
        if g.sentence_id in gold_by_id:
            raise SchemaError(f"duplicate gold annotation for {g.sentence_id!r}")
        gold_by_id[g.sentence_id] = g
    missing = sorted(set(gold_by_id) - set(pred_by_id))
    extra = sorted(set(pred_by_id) - set(gold_by_id))
    if missing or extra:
        raise SchemaError(f"prediction/gold id mismatch: missing={missing[:3]} "
                          f"extra={extra[:3]}")
    return [(pred_by_id[sid], gold_by_id[sid]) for sid in sorted(gold_by_id)]


def binary_metrics(predictions: Iterable[PredictionRecord],
                   gold: Iterable[PddAnnotation]) -> BinaryMetrics:
    """Detection metrics with delegit as the positive class."""
    pairs = _align(predictions, gold)
    if not pairs:
        raise DataError("empty evaluation set")
    tp = fp = fn = tn = 0
    for pred, ann in pairs:
        if pred.delegit and ann.delegit:
            tp += 1
        elif pred.delegit and not ann.delegit:
            fp += 1
        elif not pred.delegit and ann.delegit:
            fn += 1
        else:
            tn += 1
    return binary_metrics_from_counts(tp, fp, fn, tn)


@dataclass(frozen=True)
class CharacteristicMetrics:
    f1: dict[str, float]
    avg_f1: float
    n: int

    def rounded(self) -> dict[str, float]:
        out = {name: round3(v) for name, v in self.f1.items()}
        out["avg_f1"] = round3(self.avg_f1)
        return out


def _binary_f1(gold_labels: Sequence[int], pred_labels: Sequence[int]) -> float:
    tp = sum(1 for g, p in zip(gold_labels, pred_labels) if g == 1 and p == 1)
    fp = sum(1 for g, p in zip(gold_labels, pred_labels) if g == 0 and p == 1)
    fn = sum(1 for g, p in zip(gold_labels, pred_labels) if g == 1 and p == 0)
    return _prf(tp, fp, fn)[2]


def macro_f1(gold_labels: Sequence[int], pred_labels: Sequence[int]) -> float:
    """Unweighted mean of per-class F1 over the classes present in gold or
    predictions (absent classes are not averaged in)."""
    classes = sorted(set(gold_labels) | set(pred_labels))
    if not classes:
        raise DataError("no labels")
    scores = []
    for c in classes:
        tp = sum(1 for g, p in zip(gold_labels, pred_labels) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold_labels, pred_labels) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold_labels, pred_labels) if g == c and p != c)
        scores.append(_prf(tp, fp, fn)[2])
    return sum(scores) / len(scores)


def _predicted_characteristics(pred: PredictionRecord) -> Characteristics:
    # A gold-positive sentence the model called negative scores all-zero.
    # Parse failures already carry zeros (or the lenient repair) in the
    # record, so the stored values are scored as-is.
    if pred.characteristics is None:
        return Characteristics.zeros()
    return pred.characteristics


def characteristic_metrics(predictions: Iterable[PredictionRecord],
                           gold: Iterable[PddAnnotation]) -> CharacteristicMetrics:
    """Per-attribute F1 over the gold-positive, attribute-annotated set.

    Intensity scores as macro-F1 over its classes; the average is the
    unweighted mean of the seven attribute F1 values.
    """
    pairs = [(p, g) for p, g in _align(predictions, gold) if g.has_characteristics]
    if not pairs:
        raise DataError("no gold-positive attribute-annotated sentences")
    gold_chars = [g.characteristics() for _p, g in pairs]
    pred_chars = [_predicted_characteristics(p) for p, _g in pairs]
    f1: dict[str, float] = {}
    f1["intensity"] = macro_f1([g.intensity for g in gold_chars],
                               [p.intensity for p in pred_chars])
    for name in CHARACTERISTIC_FIELDS[1:]:
        f1[name] = _binary_f1([int(getattr(g, name)) for g in gold_chars],
                              [int(getattr(p, name)) for p in pred_chars])
    avg = sum(f1[name] for name in CHARACTERISTIC_FIELDS) / len(CHARACTERISTIC_FIELDS)
    return CharacteristicMetrics(f1=f1, avg_f1=avg, n=len(pairs))


@dataclass(frozen=True)
class SpanMetrics:
    tp_count: int
    fp_count: int
    fn_count: int
    precision: float
    recall: float
    f1: float

    def rounded(self) -> dict[str, float]:
        return {"precision": round3(self.precision), "recall": round3(self.recall),
                "f1": round3(self.f1)}


def _match_exact(gold: Sequence[Span], pred: Sequence[Span], text: str) -> int:
    gold_trimmed = list(trim_spans(text, gold))
    pred_trimmed = list(trim_spans(text, pred))
    tp = 0
    for span in pred_trimmed:
        if span in gold_trimmed:
            gold_trimmed.remove(span)
            tp += 1
    return tp


def _jaccard(a: Span, b: Span) -> float:
    inter = max(0, min(a[1], b[1]) - max(a[0], b[0]))
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union if union else 0.0


def _match_overlap(gold: Sequence[Span], pred: Sequence[Span], text: str,
                   threshold: float = 0.5) -> int:
    """Greedy bipartite matching on Jaccard overlap, best pairs first."""
    gold_trimmed = list(trim_spans(text, gold))
    pred_trimmed = list(trim_spans(text, pred))
    candidates = []
    for i, g in enumerate(gold_trimmed):
        for j, p in enumerate(pred_trimmed):
            score = _jaccard(g, p)
            if score >= threshold:
                candidates.append((-score, i, j))
    candidates.sort()
    used_gold: set[int] = set()
    used_pred: set[int] = set()
    tp = 0
    for _neg, i, j in candidates:
        if i in used_gold or j in used_pred:
            continue
        used_gold.add(i)
        used_pred.add(j)
        tp += 1
    return tp


def span_metrics(items: Iterable[tuple[str, Sequence[Span], Sequence[Span]]],
                 mode: str = "exact") -> SpanMetrics:
    """Span-level P/R/F1 over (text, gold_spans, predicted_spans) triples.

    Exact mode: a predicted span is a true positive when it equals a gold
    span's boundaries after whitespace-trimming both; each gold span can be
    matched once.  Overlap mode instead matches at Jaccard >= 0.5.  #TP
    counts spans, not sentences.
    """
    if mode not in ("exact", "overlap"):
        raise SchemaError(f"unknown span match mode {mode!r}")
    tp = total_gold = total_pred = 0
    for text, gold, pred in items:
        gold_t = trim_spans(text, gold)
        pred_t = trim_spans(text, pred)
        total_gold += len(gold_t)
        total_pred += len(pred_t)
        if mode == "exact":
            tp += _match_exact(gold, pred, text)
        else:
            tp += _match_overlap(gold, pred, text)
    fp = total_pred - tp
    fn = total_gold - tp
    precision, recall, f1 = _prf(tp, fp, fn)
    return SpanMetrics(tp_count=tp, fp_count=fp, fn_count=fn,
                       precision=precision, recall=recall, f1=f1)


def span_metrics_from_records(predictions: Iterable[PredictionRecord],
                              gold: Iterable[PddAnnotation],
                              texts: Mapping[str, str],
                              mode: str = "exact") -> SpanMetrics:
    """Span metrics over the gold-positive span-annotated sentences.

    Predictions that failed stage-2 parsing, or that called the sentence
    negative, contribute zero predicted spans.
    """
    items = []
    for pred, ann in _align(predictions, gold):
        if not ann.delegit or ann.target_spans is None:
            continue
        text = texts[ann.sentence_id]
        # Negative or span-parse-failed predictions carry no spans; both
        # contribute zero predicted spans here.
        predicted: tuple[Span, ...] = pred.target_spans or ()
        items.append((text, ann.target_spans, predicted))
    return span_metrics(items, mode=mode)


@dataclass(frozen=True)
class MetricsReport:
    binary: Optional[BinaryMetrics]
    characteristics: Optional[CharacteristicMetrics]
    spans: Optional[SpanMetrics]
    spans_overlap: Optional[SpanMetrics]

    def as_dict(self) -> dict:
        out: dict = {}
        if self.binary is not None:
            b = self.binary
            out["binary"] = {**b.rounded(), "tp": b.tp, "fp": b.fp,
                             "fn": b.fn, "tn": b.tn}
        if self.characteristics is not None:
            out["characteristics"] = {**self.characteristics.rounded(),
                                      "n": self.characteristics.n}
        if self.spans is not None:
            out["spans"] = {**self.spans.rounded(), "tp_count": self.spans.tp_count}
        if self.spans_overlap is not None:
            out["spans_overlap"] = {**self.spans_overlap.rounded(),
                                    "tp_count": self.spans_overlap.tp_count}
        return out


def evaluate(predictions: Sequence[PredictionRecord],
             gold: Sequence[PddAnnotation],
             texts: Mapping[str, str]) -> MetricsReport:
    """All applicable metric families for one prediction file."""
    binary = binary_metrics(predictions, gold)
    try:
        characteristics = characteristic_metrics(predictions, gold)
    except DataError:
        characteristics = None
    has_span_gold = any(g.delegit and g.target_spans is not None for g in gold)
    if has_span_gold:
        spans = span_metrics_from_records(predictions, gold, texts, mode="exact")
        spans_overlap = span_metrics_from_records(predictions, gold, texts,
                                                  mode="overlap")
    else:
        spans = spans_overlap = None
    return MetricsReport(binary=binary, characteristics=characteristics,
                         spans=spans, spans_overlap=spans_overlap)


CHARACTERISTIC_CSV_ORDER = ("intensity", "incivility", "group", "person",
                            "outgroup", "common_good", "institute")


def report_to_csv_rows(report: MetricsReport, model_id: str = "") -> list[list]:
    """Flat CSV rows, one per metric family, columns in table order."""
    rows: list[list] = []
    if report.binary is not None:
        b = report.binary.rounded()
        rows.append(["binary", model_id, b["accuracy"], b["precision"],
                     b["recall"], b["f1"]])
    if report.characteristics is not None:
        c = report.characteristics.rounded()
        rows.append(["characteristics", model_id,
                     *[c[name] for name in CHARACTERISTIC_CSV_ORDER], c["avg_f1"]])
    if report.spans is not None:
        s = report.spans.rounded()
        rows.append(["spans", model_id, s["precision"], s["recall"], s["f1"],
                     report.spans.tp_count])
    return rows
