"""Rule-based sentence segmentation for Hebrew (and mixed-script) text.

A boundary is a run of terminal punctuation, plus any closing quotes or
brackets, followed by whitespace or end of text.  Decimal points and dates
never precede whitespace, so they need no special casing; a short list of
Latin abbreviations guards the remaining false splits.
"""

from __future__ import annotations

TERMINALS = ".?!…"
CLOSERS = "\"'”’»)]"

# Only guards a single period; Hebrew geresh abbreviations still split,
# matching how they read at end of sentence.
_LATIN_ABBREVIATIONS = frozenset(
    {"dr", "mr", "mrs", "ms", "prof", "st", "vs", "e.g", "i.e", "cf", "jr", "sr"})


def _guarded(text: str, sentence_start: int, run_start: int, run_end: int) -> bool:
    if run_end - run_start != 1 or text[run_start] != ".":
        return False
    w = run_start
    while w > sentence_start and not text[w - 1].isspace():
        w -= 1
    word = text[w:run_start].lstrip("\"'“‘«([")
    return word.lower() in _LATIN_ABBREVIATIONS


def segment_text(raw: str) -> list[str]:
    """Split a document into sentences.

    Deterministic; joining the output with single spaces reproduces the
    input up to whitespace.  Empty or blank input yields an empty list.
    """
    sentences: list[str] = []
    n = len(raw)
    start = 0
    i = 0
    while i < n:
        if raw[i] not in TERMINALS:
            i += 1
            continue
        j = i + 1
        while j < n and raw[j] in TERMINALS:
            j += 1
        k = j
        while k < n and raw[k] in CLOSERS:
            k += 1
        if (k == n or raw[k].isspace()) and not _guarded(raw, start, i, j):
            piece = raw[start:k].strip()
            if piece:
                sentences.append(piece)
            start = k
        i = k
    tail = raw[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def segment_document(doc_id: str, raw: str) -> list[tuple[str, str]]:
    """Segment a document and assign stable per-sentence ids.

    Ids are ``{doc_id}#s{index}`` with a 1-based index, so re-running on
    the same input reproduces the same ids.
    """
    return [(f"{doc_id}#s{idx}", sent)
            for idx, sent in enumerate(segment_text(raw), start=1)]
