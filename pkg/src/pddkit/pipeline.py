"""Two-stage pipeline orchestration and training-file export.

Stage 1 labels every sentence; stage 2 (characteristics classification and
span target extraction) runs only on stage-1 positives.  Every prediction
record satisfies: characteristics and spans present iff delegit is true.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .backends import BackendKind
from .codecs import (
    ANSWER_SEPARATOR,
    decode_span_output,
    decode_stage1_output,
    decode_stage2_output,
    encode_stage1_target,
    encode_stage2_target,
)
from .errors import SchemaError, WireProtocolError
from .labelmap import LabelMap
from .records import Characteristics, PddAnnotation, PredictionRecord, SentenceRecord
from .spans import MARKER, render as render_span_markup


def _as_id_text_pairs(sentences) -> list[tuple[str, str]]:
    pairs = []
    for i, item in enumerate(sentences):
        if isinstance(item, SentenceRecord):
            pairs.append((item.id, item.text))
        elif isinstance(item, str):
            pairs.append((f"s{i}", item))
        else:
            sid, text = item
            pairs.append((str(sid), text))
    return pairs


def _require_kind(backend, kind: BackendKind, slot: str) -> None:
    actual = backend.descriptor.kind
    if actual is not kind:
        raise SchemaError(f"{slot} backend has kind {actual.value!r}, "
                          f"need {kind.value!r}")


def _batches(items: Sequence, size: int):
    for i in range(0, len(items), size):
        yield i, items[i:i + size]


def run_pipeline(stage1, stage2c, stage2s, sentences, label_map: LabelMap,
                 threshold: float = 0.5, batch_size: int = 64) -> list[PredictionRecord]:
    """Run the full cascade; one record per input sentence, input order.

    A backend exception flags the affected records and the run continues;
    a wire transport failure aborts the run.  Stage-1 outputs that decode
    to neither label are flagged negatives, so stage 2 never sees them.
    """
    _require_kind(stage1, BackendKind.BINARY, "stage-1")
    _require_kind(stage2c, BackendKind.CHARACTERISTICS, "stage-2 characteristics")
    _require_kind(stage2s, BackendKind.SPAN, "stage-2 span")
    if not 0.0 <= threshold <= 1.0:
        raise SchemaError(f"threshold {threshold} outside [0, 1]")
    pairs = _as_id_text_pairs(sentences)
    model_id = "|".join((stage1.descriptor.id, stage2c.descriptor.id,
                         stage2s.descriptor.id))

    n = len(pairs)
    delegit = [False] * n
    scores = [0.0] * n
    errors: list[Optional[str]] = [None] * n
    use_scores = hasattr(stage1, "infer_scores")

    for offset, batch in _batches(pairs, batch_size):
        texts = [t for _sid, t in batch]
        try:
            if use_scores:
                batch_scores = stage1.infer_scores(texts)
                for k, score in enumerate(batch_scores):
                    scores[offset + k] = float(score)
                    delegit[offset + k] = score >= threshold
            else:
                raw = stage1.infer(texts)
                for k, out in enumerate(raw):
                    label = decode_stage1_output(out, label_map)
                    if label is None:
                        errors[offset + k] = f"stage-1 output undecodable: {out[:80]!r}"
                    else:
                        delegit[offset + k] = label
                        scores[offset + k] = 1.0 if label else 0.0
        except WireProtocolError:
            raise
        except Exception as exc:
            for k in range(len(batch)):
                errors[offset + k] = f"stage-1 backend failure: {exc}"

    positives = [i for i in range(n) if delegit[i]]
    chars: dict[int, tuple[Characteristics, bool]] = {}
    spans: dict[int, tuple[tuple, bool]] = {}

    pos_texts = [pairs[i][1] for i in positives]
    for offset, batch in _batches(pos_texts, batch_size):
        idxs = positives[offset:offset + len(batch)]
        try:
            raw = stage2c.infer(list(batch))
            for k, out in enumerate(raw):
                chars[idxs[k]] = decode_stage2_output(out, label_map)
        except WireProtocolError:
            raise
        except Exception as exc:
            for i in idxs:
                chars[i] = (Characteristics.zeros(), False)
                errors[i] = f"stage-2 characteristics failure: {exc}"
        try:
            raw = stage2s.infer(list(batch))
            for k, out in enumerate(raw):
                spans[idxs[k]] = decode_span_output(out, batch[k])
        except WireProtocolError:
            raise
        except Exception as exc:
            for i in idxs:
                spans[i] = ((), False)
                prior = errors[i]
                message = f"stage-2 span failure: {exc}"
                errors[i] = f"{prior}; {message}" if prior else message

    records = []
    for i, (sid, _text) in enumerate(pairs):
        if delegit[i]:
            characteristics, chars_ok = chars[i]
            span_list, spans_ok = spans[i]
            records.append(PredictionRecord(
                sentence_id=sid, delegit=True, stage1_score=scores[i],
                model_id=model_id, characteristics=characteristics,
                target_spans=span_list, stage2_parse_ok=chars_ok and spans_ok,
                error=errors[i]))
        else:
            records.append(PredictionRecord(
                sentence_id=sid, delegit=False, stage1_score=scores[i],
                model_id=model_id, stage2_parse_ok=True, error=errors[i]))
    return records


# -- training-file export ----------------------------------------------------

def _normalize_input(text: str) -> str:
    # Length-preserving, so span offsets stay valid in the marked target.
    return text.replace("\r", " ").replace("\n", " ")


def format_example(input_text: str, target: str) -> str:
    return f"{_normalize_input(input_text)}\n{ANSWER_SEPARATOR}{target}"


def export_training_file(corpus, annotations: Iterable[PddAnnotation],
                         ids: Sequence[str], task: BackendKind,
                         label_map: LabelMap) -> tuple[str, int, int]:
    """Render training examples for one split part.

    Returns (file_text, example_count, skipped_count).  Examples follow the
    order of ``ids``; blocks are separated by one blank line and the file
    ends with a newline when non-empty.  Span examples with spans that do
    not fit their sentence are skipped and counted.
    """
    gold: dict[str, PddAnnotation] = {}
    for ann in annotations:
        if ann.sentence_id in gold:
            raise SchemaError(f"multiple gold annotations for {ann.sentence_id!r}")
        gold[ann.sentence_id] = ann

    blocks: list[str] = []
    skipped = 0
    for sid in ids:
        ann = gold.get(sid)
        if ann is None:
            continue
        record = corpus[sid]
        if task is BackendKind.BINARY:
            target = encode_stage1_target(ann.delegit, label_map)
        elif task is BackendKind.CHARACTERISTICS:
            if not ann.has_characteristics:
                continue
            target = encode_stage2_target(ann.characteristics(), label_map)
        elif task is BackendKind.SPAN:
            if not ann.delegit or ann.target_spans is None:
                continue
            text = _normalize_input(record.text)
            if MARKER in text:
                skipped += 1
                continue
            try:
                target = render_span_markup(text, ann.target_spans)
            except Exception:
                skipped += 1
                continue
            blocks.append(f"{text}\n{ANSWER_SEPARATOR}{target}")
            continue
        else:
            raise SchemaError(f"unknown task kind {task!r}")
        blocks.append(format_example(record.text, target))
    body = "\n\n".join(blocks)
    return (body + "\n" if blocks else ""), len(blocks), skipped


def parse_training_file(text: str) -> list[tuple[str, str]]:
    """Inverse of export: list of (input, target) pairs."""
    pairs = []
    if not text.strip():
        return pairs
    for block in text.strip("\n").split("\n\n"):
        lines = block.split("\n")
        if len(lines) != 2 or not lines[1].startswith(ANSWER_SEPARATOR):
            raise SchemaError(f"malformed training block: {block[:80]!r}")
        pairs.append((lines[0], lines[1][len(ANSWER_SEPARATOR):]))
    return pairs


def experiment_manifest() -> dict:
    """Hyperparameter grids recorded for external trainers, by model family."""
    return {
        "separator": ANSWER_SEPARATOR,
        "tasks": [k.value for k in BackendKind],
        "encoder": {"learning_rates": [1e-5, 3e-5, 5e-5], "max_epochs": 10,
                    "optimizer": "adamw", "lr_schedule": "linear"},
        "decoder": {"learning_rates": [1e-5, 1e-4], "max_epochs": 6,
                    "optimizer": "adamw", "lr_schedule": "linear",
                    "adapter": {"method": "qlora", "rank": 256, "alpha": 512}},
    }
