"""Inline span markup: `%%%` fences around target phrases.

``render`` embeds half-open character spans into text as %%%...%%% pairs;
``parse`` recovers (clean_text, spans).  The two are exact inverses on any
text that does not itself contain the marker.
"""

from __future__ import annotations

from typing import Sequence

from .errors import SpanMarkupError
from .records import Span, validate_spans

MARKER = "%%%"


def render(text: str, spans: Sequence[Span]) -> str:
    """Wrap each span of ``text`` in %%% fences.

    Spans must satisfy the usual invariants (sorted, non-overlapping, within
    the text).  Raises when the text already contains the marker, since the
    result could not be parsed back unambiguously.
    """
    spans = validate_spans(spans, len(text))
    if MARKER in text:
        raise SpanMarkupError(f"text already contains {MARKER!r}")
    parts = []
    cursor = 0
    for start, end in spans:
        parts.append(text[cursor:start])
        parts.append(MARKER)
        parts.append(text[start:end])
        parts.append(MARKER)
        cursor = end
    parts.append(text[cursor:])
    return "".join(parts)


def parse(marked: str) -> tuple[str, tuple[Span, ...]]:
    """Recover (clean_text, spans) from %%%-fenced text.

    Raises SpanMarkupError on an odd number of markers or an empty fenced
    region.  Offsets index into the returned clean text.
    """
    pieces = marked.split(MARKER)
    if len(pieces) % 2 == 0:
        raise SpanMarkupError(f"unbalanced {MARKER!r} markers "
                              f"({len(pieces) - 1} found)")
    clean_parts = []
    spans = []
    offset = 0
    for i, piece in enumerate(pieces):
        if i % 2 == 1:
            if not piece:
                raise SpanMarkupError("empty span between markers")
            spans.append((offset, offset + len(piece)))
        clean_parts.append(piece)
        offset += len(piece)
    return "".join(clean_parts), validate_spans(spans)


def extract_phrases(text: str, spans: Sequence[Span]) -> tuple[str, ...]:
    """The raw phrases each span covers."""
    spans = validate_spans(spans, len(text))
    return tuple(text[s:e] for s, e in spans)


def trim_span(text: str, span: Span) -> Span | None:
    """Shrink a span to exclude leading/trailing whitespace.

    Returns None when the span covers only whitespace.
    """
    start, end = span
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        return None
    return (start, end)


def trim_spans(text: str, spans: Sequence[Span]) -> tuple[Span, ...]:
    """Whitespace-trim every span, dropping any that become empty."""
    out = []
    for span in validate_spans(spans, len(text)):
        trimmed = trim_span(text, span)
        if trimmed is not None:
            out.append(trimmed)
    return tuple(out)


# Descriptive aliases for the package-level API.
render_span_markup = render
parse_span_markup = parse
