"""Conditioning labels: evidence sets extracted from programs, the
vocabularies used for one-hot encoding, and label subsampling for the
partial-observability protocol."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .api import ApiDatabase
from .lang import Program
from .sketch import CONTROL_SYMBOLS, Sketch, abstract, grammar_symbols, sketch_calls, sketch_types

_CAMEL_RE = re.compile(r"[0-9]+|[a-z]+|[A-Z]+(?![a-z])|[A-Z][a-z]*")


@dataclass(frozen=True)
class Label:
    """Evidence triple: API call names, type names, and lowercase keywords."""
    calls: frozenset[str]
    types: frozenset[str]
    keys: frozenset[str]

    KINDS = ("calls", "types", "keys")

    def kind(self, name: str) -> frozenset[str]:
        return getattr(self, name)

    def size(self) -> int:
        return len(self.calls) + len(self.types) + len(self.keys)

    def is_empty(self) -> bool:
        return self.size() == 0

    def to_json(self) -> dict:
        return {"calls": sorted(self.calls), "types": sorted(self.types),
                "keys": sorted(self.keys)}

    @staticmethod
    def from_json(doc: dict) -> "Label":
        return Label(frozenset(doc.get("calls", [])),
                     frozenset(doc.get("types", [])),
                     frozenset(doc.get("keys", [])))

    @staticmethod
    def of(calls=(), types=(), keys=()) -> "Label":
        return Label(frozenset(calls), frozenset(types), frozenset(keys))


def split_camel_case(name: str) -> list[str]:
    """Split an identifier at lower-to-upper and digit boundaries, keeping
    single-character fragments, all lowercased."""
    return [m.group(0).lower() for m in _CAMEL_RE.finditer(name)]


def label_of_sketch(y: Sketch) -> Label:
    calls = {c.method for c in sketch_calls(y)}
    types = sketch_types(y)
    keys: set[str] = set()
    for name in calls | types:
        keys.update(split_camel_case(name))
    return Label(frozenset(calls), frozenset(types), frozenset(keys))


def extract_label(program: Program, db: ApiDatabase) -> Label:
    """Evidence a program gives about itself: the API calls it makes, the
    types those calls involve, and camel-case fragments of both."""
    return label_of_sketch(abstract(program, db))


def _kept(fraction: float, n: int) -> int:
    m = fraction * n
    if math.isclose(m, round(m)):
        return int(round(m))
    return math.ceil(m)


def subsample_label(label: Label, fraction: float, rng: np.random.Generator) -> Label:
    """Keep ceil(fraction * |set|) uniformly chosen elements per kind.

    Deterministic under a fixed generator state; the result is always a
    componentwise subset of the input.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    kept = {}
    for kind in Label.KINDS:
        items = sorted(label.kind(kind))
        k = _kept(fraction, len(items))
        if k >= len(items):
            kept[kind] = frozenset(items)
        else:
            idx = rng.choice(len(items), size=k, replace=False)
            kept[kind] = frozenset(items[i] for i in idx)
    return Label(kept["calls"], kept["types"], kept["keys"])


@dataclass
class Vocabularies:
    """Dense index maps for the three evidence kinds plus the decoder
    vocabulary over sketch grammar symbols."""
    calls: dict[str, int]
    types: dict[str, int]
    keys: dict[str, int]
    grammar: dict[str, int]
    call_tokens: frozenset[str]
    type_tokens: frozenset[str]

    def kind(self, name: str) -> dict[str, int]:
        return getattr(self, name)

    @staticmethod
    def build(labels, sketches) -> "Vocabularies":
        calls: set[str] = set()
        types: set[str] = set()
        keys: set[str] = set()
        for lab in labels:
            calls |= lab.calls
            types |= lab.types
            keys |= lab.keys
        call_tokens: set[str] = set()
        type_tokens: set[str] = set()
        for y in sketches:
            for sym in grammar_symbols(y):
                if sym in CONTROL_SYMBOLS:
                    continue
                if "(" in sym:
                    call_tokens.add(sym)
                else:
                    type_tokens.add(sym)
        overlap = (call_tokens | type_tokens) & set(CONTROL_SYMBOLS)
        if overlap:
            raise ValueError(f"sketch symbols collide with control symbols: {overlap}")
        grammar = list(CONTROL_SYMBOLS) + sorted(call_tokens) + sorted(type_tokens)
        index = lambda items: {s: i for i, s in enumerate(items)}
        return Vocabularies(index(sorted(calls)), index(sorted(types)),
                            index(sorted(keys)), index(grammar),
                            frozenset(call_tokens), frozenset(type_tokens))

    def to_json(self) -> dict:
        order = lambda d: [s for s, _ in sorted(d.items(), key=lambda kv: kv[1])]
        return {"calls": order(self.calls), "types": order(self.types),
                "keys": order(self.keys), "grammar": order(self.grammar),
                "call_tokens": sorted(self.call_tokens),
                "type_tokens": sorted(self.type_tokens)}

    @staticmethod
    def from_json(doc: dict) -> "Vocabularies":
        index = lambda items: {s: i for i, s in enumerate(items)}
        return Vocabularies(index(doc["calls"]), index(doc["types"]),
                            index(doc["keys"]), index(doc["grammar"]),
                            frozenset(doc["call_tokens"]),
                            frozenset(doc["type_tokens"]))
