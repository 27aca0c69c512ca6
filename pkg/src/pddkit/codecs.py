"""Target-string codecs for the two classifier stages.

Encoding produces the canonical training/output grammar; decoding accepts
arbitrary model output, repairs leniently, and reports whether the output
was grammatical via a parse_ok flag.
"""

from __future__ import annotations

import json
from typing import Optional

from .labelmap import LabelMap
from .records import CHARACTERISTIC_FIELDS, Characteristics
from .spans import parse as parse_span_markup, render as render_span_markup

ANSWER_SEPARATOR = "### Answer: "


def encode_stage1_target(label: bool, label_map: LabelMap) -> str:
    return label_map.true_token if label else label_map.false_token


def decode_stage1_output(raw: str, label_map: LabelMap) -> Optional[bool]:
    """Recover the binary label from model output; None when undecodable.

    Exact match after trimming wins; otherwise the label whose token occurs
    in the output, provided exactly one of the two does.
    """
    text = raw.strip()
    if text == label_map.true_token:
        return True
    if text == label_map.false_token:
        return False
    has_true = label_map.true_token in text
    has_false = label_map.false_token in text
    if has_true == has_false:
        return None
    return has_true


def encode_stage2_target(characteristics: Characteristics, label_map: LabelMap) -> str:
    """Single-line JSON object, keys in label-map order, numeric values."""
    numeric = characteristics.as_numeric()
    pairs = {label_map.key_for(f): numeric[f] for f in CHARACTERISTIC_FIELDS}
    return json.dumps(pairs, ensure_ascii=False, separators=(", ", ": "))


def _first_json_object(raw: str) -> Optional[dict]:
    decoder = json.JSONDecoder()
    idx = raw.find("{")
    while idx != -1:
        try:
            obj, _end = decoder.raw_decode(raw[idx:])
        except ValueError:
            obj = None
        if isinstance(obj, dict):
            return obj
        idx = raw.find("{", idx + 1)
    return None


def decode_stage2_output(raw: str, label_map: LabelMap) -> tuple[Characteristics, bool]:
    """Parse characteristics from model output.

    Takes the first balanced JSON object in the string and ignores anything
    around it.  Missing keys default to 0, out-of-range or non-integer
    values are clamped, and any such repair clears parse_ok.  No object at
    all yields all-zero characteristics with parse_ok false.
    """
    obj = _first_json_object(raw)
    if obj is None:
        return Characteristics.zeros(), False
    parse_ok = True
    values: dict[str, int] = {}
    for field_name in CHARACTERISTIC_FIELDS:
        key = label_map.key_for(field_name)
        limit = 2 if field_name == "intensity" else 1
        if key not in obj:
            parse_ok = False
            values[field_name] = 0
            continue
        raw_value = obj[key]
        as_int = 0
        grammatical = False
        if isinstance(raw_value, bool):
            as_int = int(raw_value)
        elif isinstance(raw_value, (int, float)):
            try:
                as_int = int(raw_value)
                grammatical = raw_value == as_int
            except (ValueError, OverflowError):
                as_int = 0
        if not grammatical:
            parse_ok = False
        if not 0 <= as_int <= limit:
            parse_ok = False
            as_int = min(max(as_int, 0), limit)
        values[field_name] = as_int
    chars = Characteristics(intensity=values["intensity"],
                            **{f: bool(values[f]) for f in CHARACTERISTIC_FIELDS
                               if f != "intensity"})
    return chars, parse_ok


def decode_span_output(raw: str, original_text: str) -> tuple[tuple[tuple[int, int], ...], bool]:
    """Recover predicted spans from marked-up model output.

    The output only counts as parsed when removing the markers reproduces
    the input sentence exactly; otherwise zero spans with parse_ok false.
    """
    try:
        clean, spans = parse_span_markup(raw)
    except Exception:
        return (), False
    if clean != original_text:
        return (), False
    return spans, True


def encode_span_target(text: str, spans) -> str:
    """Span-task target: the sentence with every span fenced by markers."""
    return render_span_markup(text, spans)
