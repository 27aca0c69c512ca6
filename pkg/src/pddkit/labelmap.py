"""Versioned label maps: the output vocabulary of generative backends.

The true/false tokens and the JSON keys of the second-stage output are
configuration, not code; a documented default ships as package data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import SchemaError
from .records import CHARACTERISTIC_FIELDS


@dataclass(frozen=True)
class LabelMap:
    """Output vocabulary for one annotation language/config.

    ``keys`` maps each internal field name to its serialized JSON key, in
    the fixed field order.  Neither boolean token may contain the other,
    so containment-based decoding stays unambiguous.
    """

    id: str
    true_token: str
    false_token: str
    keys: dict[str, str]

    def __post_init__(self):
        if not self.id:
            raise SchemaError("label map needs an id")
        if not self.true_token or not self.false_token:
            raise SchemaError("label map needs non-empty true/false tokens")
        if self.true_token == self.false_token:
            raise SchemaError("true and false tokens must differ")
        if self.true_token in self.false_token or self.false_token in self.true_token:
            raise SchemaError("neither boolean token may contain the other")
        missing = [f for f in CHARACTERISTIC_FIELDS if f not in self.keys]
        if missing:
            raise SchemaError(f"label map missing keys for: {', '.join(missing)}")
        extra = set(self.keys) - set(CHARACTERISTIC_FIELDS)
        if extra:
            raise SchemaError(f"label map has unknown fields: {sorted(extra)}")
        values = list(self.keys.values())
        if len(set(values)) != len(values):
            raise SchemaError("label map keys must be unique")
        object.__setattr__(self, "keys",
                           {f: self.keys[f] for f in CHARACTERISTIC_FIELDS})

    def key_for(self, field_name: str) -> str:
        return self.keys[field_name]

    def field_for(self, key: str) -> str | None:
        for field_name, mapped in self.keys.items():
            if mapped == key:
                return field_name
        return None


def label_map_from_dict(data: dict) -> LabelMap:
    for field_name in ("id", "true_token", "false_token", "keys"):
        if field_name not in data:
            raise SchemaError(f"label map config missing {field_name!r}")
    return LabelMap(id=data["id"], true_token=data["true_token"],
                    false_token=data["false_token"], keys=dict(data["keys"]))


def load_label_map(path=None) -> LabelMap:
    """Load a label map from a JSON file, or the packaged default."""
    if path is None:
        text = resources.files("pddkit").joinpath("data/label_map_default.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return label_map_from_dict(json.loads(text))


DEFAULT_LABEL_MAP = load_label_map()
