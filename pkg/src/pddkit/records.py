"""Core record types: sentences, annotations, predictions, speakers.

All spans are half-open [start, end) character offsets into the clean
sentence text, sorted by start and pairwise non-overlapping.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import SchemaError

Span = tuple[int, int]

# Conditional attribute fields, in annotation-scheme order.  "intensity" is
# the ordinal field; the remaining six are binary flags.
FLAG_FIELDS = ("incivility", "outgroup", "common_good", "group", "person", "institute")
CHARACTERISTIC_FIELDS = ("intensity",) + FLAG_FIELDS

INTENSITY_VALUES = (0, 1, 2)


class Source(str, Enum):
    FACEBOOK = "facebook"
    KNESSET = "knesset"
    NEWS = "news"


def coerce_source(value: "Source | str") -> Source:
    if isinstance(value, Source):
        return value
    try:
        return Source(value)
    except ValueError:
        raise SchemaError(f"unknown source {value!r}; expected one of "
                          f"{[s.value for s in Source]}") from None


def validate_spans(spans: Sequence[Span], text_len: Optional[int] = None) -> tuple[Span, ...]:
    """Check span invariants; returns the spans as a tuple.

    Spans must be integer pairs with 0 <= start < end, sorted by start and
    non-overlapping.  When ``text_len`` is given, end offsets must not
    exceed it.
    """
    out = []
    prev_end = 0
    for raw in spans:
        try:
            start, end = int(raw[0]), int(raw[1])
        except (TypeError, ValueError, IndexError):
            raise SchemaError(f"malformed span {raw!r}") from None
        if start < 0 or start >= end:
            raise SchemaError(f"invalid span ({start}, {end}): need 0 <= start < end")
        if out and start < prev_end:
            raise SchemaError(f"span ({start}, {end}) overlaps or is out of order "
                              f"(previous end {prev_end})")
        if text_len is not None and end > text_len:
            raise SchemaError(f"span ({start}, {end}) exceeds text length {text_len}")
        out.append((start, end))
        prev_end = end
    return tuple(out)


@dataclass(frozen=True)
class SentenceRecord:
    """One segmented sentence; the unit of annotation, prediction and analysis."""

    id: str
    text: str
    source: Source
    date: dt.date
    speaker_id: Optional[str] = None
    doc_id: Optional[str] = None
    char_len: int = field(default=-1)

    def __post_init__(self):
        if not self.id:
            raise SchemaError("sentence id must be non-empty")
        if not self.text or not self.text.strip():
            raise SchemaError(f"sentence {self.id!r} has empty text")
        object.__setattr__(self, "source", coerce_source(self.source))
        if not isinstance(self.date, dt.date) or isinstance(self.date, dt.datetime):
            raise SchemaError(f"sentence {self.id!r}: date must be a calendar date")
        if self.char_len < 0:
            object.__setattr__(self, "char_len", len(self.text))
        elif self.char_len != len(self.text):
            raise SchemaError(f"sentence {self.id!r}: char_len {self.char_len} "
                              f"!= len(text) {len(self.text)}")


@dataclass(frozen=True)
class Characteristics:
    """The seven conditional attributes of a positive sentence."""

    intensity: int = 0
    incivility: bool = False
    outgroup: bool = False
    common_good: bool = False
    group: bool = False
    person: bool = False
    institute: bool = False

    def __post_init__(self):
        if self.intensity not in INTENSITY_VALUES:
            raise SchemaError(f"intensity {self.intensity!r} not in {INTENSITY_VALUES}")
        for name in FLAG_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, bool):
                raise SchemaError(f"{name} must be a boolean, got {value!r}")

    @classmethod
    def zeros(cls) -> "Characteristics":
        return cls(0, False, False, False, False, False, False)

    def as_numeric(self) -> dict[str, int]:
        """Field -> numeric value (flags as 0/1), in scheme order."""
        out = {"intensity": self.intensity}
        for name in FLAG_FIELDS:
            out[name] = int(getattr(self, name))
        return out


@dataclass(frozen=True)
class PddAnnotation:
    """One annotator's labels for one sentence.

    The attribute fields and target spans are conditional: they may be
    present only when ``delegit`` is true.  A positive sentence may still
    leave them unset (only a subset of positives receives the second
    annotation pass).  ``target_spans=()`` means "span-annotated, no
    target mentioned"; ``None`` means not span-annotated.
    """

    sentence_id: str
    annotator_id: str
    delegit: bool
    intensity: Optional[int] = None
    incivility: Optional[bool] = None
    outgroup: Optional[bool] = None
    common_good: Optional[bool] = None
    group: Optional[bool] = None
    person: Optional[bool] = None
    institute: Optional[bool] = None
    target_spans: Optional[tuple[Span, ...]] = None
    timestamp: Optional[dt.datetime] = None

    def __post_init__(self):
        if not self.sentence_id:
            raise SchemaError("annotation missing sentence_id")
        if not self.delegit:
            offending = [n for n in CHARACTERISTIC_FIELDS if getattr(self, n) is not None]
            if self.target_spans is not None:
                offending.append("target_spans")
            if offending:
                raise SchemaError(
                    f"annotation for {self.sentence_id!r}: delegit is false but "
                    f"conditional fields present: {', '.join(offending)}")
        if self.intensity is not None and self.intensity not in INTENSITY_VALUES:
            raise SchemaError(f"intensity {self.intensity!r} not in {INTENSITY_VALUES}")
        if self.target_spans is not None:
            object.__setattr__(self, "target_spans",
                               validate_spans(self.target_spans))

    def validate_against_text(self, text_or_len: "str | int") -> None:
        if self.target_spans is not None:
            length = (len(text_or_len) if isinstance(text_or_len, str)
                      else text_or_len)
            validate_spans(self.target_spans, length)

    @property
    def has_characteristics(self) -> bool:
        """True when this is a positive with at least one attribute annotated."""
        return self.delegit and any(
            getattr(self, n) is not None for n in CHARACTERISTIC_FIELDS)

    def characteristics(self) -> Characteristics:
        """Attributes as a complete record; unset fields default to 0/False."""
        return Characteristics(
            intensity=self.intensity if self.intensity is not None else 0,
            **{n: bool(getattr(self, n)) for n in FLAG_FIELDS})

    def content_key(self):
        """Label content ignoring annotator and timestamp (for unanimity checks)."""
        return (self.delegit,) + tuple(
            getattr(self, n) for n in CHARACTERISTIC_FIELDS) + (self.target_spans,)


@dataclass(frozen=True)
class PredictionRecord:
    """Pipeline output for one sentence.

    ``characteristics`` and ``target_spans`` are present exactly when
    ``delegit`` is true (the second stage runs on positives only); a
    second-stage parse failure keeps them present but all-zero/empty with
    ``stage2_parse_ok`` false.
    """

    sentence_id: str
    delegit: bool
    stage1_score: float
    model_id: str
    characteristics: Optional[Characteristics] = None
    target_spans: Optional[tuple[Span, ...]] = None
    stage2_parse_ok: bool = True
    error: Optional[str] = None

    def __post_init__(self):
        if not 0.0 <= self.stage1_score <= 1.0:
            raise SchemaError(f"stage1_score {self.stage1_score} outside [0, 1]")
        if self.delegit:
            if self.characteristics is None or self.target_spans is None:
                raise SchemaError(
                    f"positive prediction for {self.sentence_id!r} must carry "
                    "characteristics and target_spans")
        else:
            if self.characteristics is not None or self.target_spans is not None:
                raise SchemaError(
                    f"negative prediction for {self.sentence_id!r} must not carry "
                    "second-stage fields")
        if self.target_spans is not None:
            object.__setattr__(self, "target_spans",
                               validate_spans(self.target_spans))


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


class Bloc(str, Enum):
    RIGHT = "right"
    CENTER = "center"
    LEFT = "left"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SpeakerMeta:
    """Join key for all speaker-level analyses.

    ``coalition_intervals`` are closed date ranges [start, end] during which
    the speaker sits in the coalition; ``end=None`` means open-ended.
    """

    speaker_id: str
    name: str = ""
    gender: Gender = Gender.UNKNOWN
    bloc: Bloc = Bloc.UNKNOWN
    party: str = ""
    coalition_intervals: tuple[tuple[dt.date, Optional[dt.date]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gender", Gender(self.gender))
        object.__setattr__(self, "bloc", Bloc(self.bloc))
        if any(e is None for s, e in self.coalition_intervals[:-1]):
            raise SchemaError(f"speaker {self.speaker_id!r}: open-ended interval must be last")
        prev_end: Optional[dt.date] = None
        for start, end in self.coalition_intervals:
            if end is not None and end < start:
                raise SchemaError(f"speaker {self.speaker_id!r}: interval ends before it starts")
            if prev_end is not None and start <= prev_end:
                raise SchemaError(f"speaker {self.speaker_id!r}: overlapping coalition intervals")
            prev_end = end

    def in_coalition(self, day: dt.date) -> bool:
        for start, end in self.coalition_intervals:
            if start <= day and (end is None or day <= end):
                return True
        return False


def clone(record, **changes):
    """``dataclasses.replace`` passthrough, re-exported for convenience."""
    return replace(record, **changes)
