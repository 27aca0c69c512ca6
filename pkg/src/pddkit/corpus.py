"""Corpus container, ingestion, splitting, and descriptive statistics."""

from __future__ import annotations

import datetime as dt
import math
import random
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import DuplicateIdError, SchemaError
from .records import FLAG_FIELDS, PddAnnotation, SentenceRecord, Source, coerce_source


class Corpus:
    """Ordered, id-unique collection of sentences.

    Reads are safe to share across threads; mutation is serialized by an
    internal lock.
    """

    def __init__(self, records: Iterable[SentenceRecord] = ()):
        self._by_id: dict[str, SentenceRecord] = {}
        self._lock = threading.Lock()
        for rec in records:
            self.add(rec)

    def add(self, record: SentenceRecord) -> None:
        with self._lock:
            if record.id in self._by_id:
                raise DuplicateIdError(f"duplicate sentence id {record.id!r}")
            self._by_id[record.id] = record

    def extend(self, records: Iterable[SentenceRecord]) -> None:
        for rec in records:
            self.add(rec)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[SentenceRecord]:
        return iter(self._by_id.values())

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id

    def __getitem__(self, sentence_id: str) -> SentenceRecord:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise KeyError(f"no sentence with id {sentence_id!r}") from None

    def get(self, sentence_id: str) -> Optional[SentenceRecord]:
        return self._by_id.get(sentence_id)

    def ids(self) -> list[str]:
        return list(self._by_id)

    def source_counts(self) -> dict[Source, int]:
        counts = {s: 0 for s in Source}
        for rec in self:
            counts[rec.source] += 1
        return counts

    def filter(self, predicate) -> "Corpus":
        return Corpus(rec for rec in self if predicate(rec))

    def union(self, other: "Corpus") -> "Corpus":
        merged = Corpus(self)
        merged.extend(other)
        return merged


def ingest(rows: Iterable[Mapping | SentenceRecord], source: Source | str | None = None,
           into: Optional[Corpus] = None) -> Corpus:
    """Build (or extend) a corpus from row mappings or ready records.

    Rows need id, text, and date; ``source`` overrides any per-row source.
    Duplicate ids and missing text are rejected by name.
    """
    corpus = into if into is not None else Corpus()
    forced = coerce_source(source) if source is not None else None
    for row in rows:
        if isinstance(row, SentenceRecord):
            rec = row
            if forced is not None and rec.source != forced:
                rec = SentenceRecord(rec.id, rec.text, forced, rec.date,
                                     rec.speaker_id, rec.doc_id)
        else:
            rec = record_from_row(row, forced)
        corpus.add(rec)
    return corpus


def record_from_row(row: Mapping, forced_source: Optional[Source] = None) -> SentenceRecord:
    missing = [k for k in ("id", "text", "date") if not row.get(k)]
    if forced_source is None and not row.get("source"):
        missing.append("source")
    if missing:
        raise SchemaError(f"row {row.get('id', '<no id>')!r} missing "
                          f"required fields: {', '.join(missing)}")
    return SentenceRecord(
        id=str(row["id"]),
        text=row["text"],
        source=forced_source if forced_source is not None else coerce_source(row["source"]),
        date=parse_date(row["date"]),
        speaker_id=row.get("speaker_id") or None,
        doc_id=row.get("doc_id") or None,
    )


def parse_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise SchemaError(f"bad date {value!r}; expected ISO-8601 YYYY-MM-DD") from None


@dataclass(frozen=True)
class CorpusSplit:
    """Disjoint train/validation/test partition of sentence ids."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "validation", tuple(self.validation))
        object.__setattr__(self, "test", tuple(self.test))
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        parts = (set(self.train), set(self.validation), set(self.test))
        names = ("train", "validation", "test")
        for i in range(3):
            for j in range(i + 1, 3):
                both = parts[i] & parts[j]
                if both:
                    raise SchemaError(f"splits {names[i]} and {names[j]} share "
                                      f"{len(both)} ids, e.g. {sorted(both)[0]!r}")

    def part(self, name: str) -> tuple[str, ...]:
        if name == "dev":
            name = "validation"
        if name not in ("train", "validation", "test"):
            raise SchemaError(f"unknown split part {name!r}")
        return getattr(self, name)

    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.validation), len(self.test))

    def assignment(self) -> dict[str, str]:
        out = {}
        for name in ("train", "validation", "test"):
            for sid in getattr(self, name):
                out[sid] = name
        return out


def largest_remainder_sizes(total: int, ratios: Sequence[float]) -> list[int]:
    """Integer sizes proportional to ratios, summing exactly to total.

    Floors each share, then hands leftover units to the largest fractional
    remainders; ties go to the earlier position.
    """
    if any(r < 0 for r in ratios):
        raise SchemaError(f"negative ratio in {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SchemaError(f"ratios {tuple(ratios)} sum to {sum(ratios)!r}, not 1")
    shares = [round(total * r, 9) for r in ratios]
    base = [math.floor(s) for s in shares]
    leftover = total - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(shares[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def split_corpus(corpus: Corpus, ratios: Sequence[float] = (0.7, 0.15, 0.15),
                 seed: int = 0) -> CorpusSplit:
    """Seeded random partition into train/validation/test.

    Ids are sorted before shuffling, so the result depends only on the id
    set, the ratios, and the seed.
    """
    if len(ratios) != 3:
        raise SchemaError(f"need exactly 3 ratios, got {len(ratios)}")
    ids = sorted(corpus.ids())
    sizes = largest_remainder_sizes(len(ids), ratios)
    rng = random.Random(seed)
    rng.shuffle(ids)
    cut1, cut2 = sizes[0], sizes[0] + sizes[1]
    return CorpusSplit(
        train=tuple(ids[:cut1]),
        validation=tuple(ids[cut1:cut2]),
        test=tuple(ids[cut2:]),
        seed=seed,
        ratios=(ratios[0], ratios[1], ratios[2]),
    )


@dataclass(frozen=True)
class CorpusStats:
    """Descriptive counts and rates; rates are fractions in [0, 1]."""

    total: int
    source_counts: dict[Source, int]
    delegit_count: int
    annotated_count: int
    characteristic_subset_size: int
    characteristic_counts: dict[str, int]
    intensity_mean: Optional[float]
    intensity_sd: Optional[float]
    intensity_n: int
    span_subset_size: int
    span_total: int
    span_positive_count: int

    @property
    def source_rates(self) -> dict[Source, float]:
        if self.total == 0:
            return {s: 0.0 for s in self.source_counts}
        return {s: c / self.total for s, c in self.source_counts.items()}

    @property
    def delegit_rate(self) -> float:
        return self.delegit_count / self.total if self.total else 0.0

    @property
    def characteristic_rates(self) -> dict[str, float]:
        n = self.characteristic_subset_size
        return {k: (c / n if n else 0.0) for k, c in self.characteristic_counts.items()}

    @property
    def span_share(self) -> float:
        n = self.span_subset_size
        return self.span_positive_count / n if n else 0.0


def format_percent(fraction: float) -> str:
    """Render a fraction as a percentage with two decimals, e.g. 0.6427 -> '64.27'."""
    return f"{fraction * 100:.2f}"


def corpus_stats(corpus: Corpus, annotations: Iterable[PddAnnotation]) -> CorpusStats:
    """Descriptive statistics over gold annotations (one per sentence).

    Characteristic rates use the subset of positives carrying at least one
    attribute field; span share uses the subset carrying span data, where
    an empty span tuple means annotated-with-no-target.
    """
    by_sentence: dict[str, PddAnnotation] = {}
    for ann in annotations:
        if ann.sentence_id not in corpus:
            raise SchemaError(f"annotation references unknown sentence {ann.sentence_id!r}")
        if ann.sentence_id in by_sentence:
            raise DuplicateIdError(f"multiple annotations for sentence {ann.sentence_id!r}")
        by_sentence[ann.sentence_id] = ann

    delegit_count = sum(1 for a in by_sentence.values() if a.delegit)
    char_subset = [a for a in by_sentence.values() if a.has_characteristics]
    char_counts = {name: 0 for name in FLAG_FIELDS}
    intensities = []
    for ann in char_subset:
        for name in FLAG_FIELDS:
            if getattr(ann, name):
                char_counts[name] += 1
        if ann.intensity is not None:
            intensities.append(ann.intensity)
    if intensities:
        mean = sum(intensities) / len(intensities)
        sd = math.sqrt(sum((x - mean) ** 2 for x in intensities) / len(intensities))
    else:
        mean = sd = None

    span_subset = [a for a in by_sentence.values()
                   if a.delegit and a.target_spans is not None]
    span_total = sum(len(a.target_spans) for a in span_subset)
    span_positive = sum(1 for a in span_subset if a.target_spans)

    return CorpusStats(
        total=len(corpus),
        source_counts=corpus.source_counts(),
        delegit_count=delegit_count,
        annotated_count=len(by_sentence),
        characteristic_subset_size=len(char_subset),
        characteristic_counts=char_counts,
        intensity_mean=mean,
        intensity_sd=sd,
        intensity_n=len(intensities),
        span_subset_size=len(span_subset),
        span_total=span_total,
        span_positive_count=span_positive,
    )


def render_stats(stats: CorpusStats) -> str:
    """Human-readable stats block with percentages at two decimals."""
    lines = [f"sentences: {stats.total}"]
    for source in Source:
        count = stats.source_counts.get(source, 0)
        lines.append(f"  {source.value}: {count} ({format_percent(stats.source_rates[source])}%)")
    lines.append(f"annotated: {stats.annotated_count}")
    lines.append(f"delegitimizing: {stats.delegit_count} "
                 f"({format_percent(stats.delegit_rate)}%)")
    lines.append(f"attribute-annotated positives: {stats.characteristic_subset_size}")
    for name in FLAG_FIELDS:
        count = stats.characteristic_counts.get(name, 0)
        rate = stats.characteristic_rates.get(name, 0.0)
        lines.append(f"  {name}: {count} ({format_percent(rate)}%)")
    if stats.intensity_mean is not None:
        lines.append(f"intensity: mean {stats.intensity_mean:.3f} "
                     f"sd {stats.intensity_sd:.3f} (n={stats.intensity_n})")
    lines.append(f"span-annotated positives: {stats.span_subset_size}")
    lines.append(f"target spans: {stats.span_total}")
    lines.append(f"positives with >=1 span: {stats.span_positive_count} "
                 f"({format_percent(stats.span_share)}%)")
    return "\n".join(lines)
