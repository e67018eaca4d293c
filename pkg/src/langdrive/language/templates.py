"""Template bank and instruction generation.

Sentences are lowercase, punctuation-free word sequences (contractions are
split, "you re going to"). Singles draw uniformly from an authored list.
Doubles concatenate two single sentences with a connective. Ordinals hold two
groups, one derived by substituting "first left" style phrases into the
single templates and one authored; the group is drawn first, then the
sentence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .keywords import ALL_KEYWORDS, Keyword

CONNECTIVES = ("and then", "then", "after that", "")

# authored turn templates; {d} is the direction word
_TURN_TEMPLATES = [
    "turn {d}",
    "make a {d} turn",
    "{d}",
    "take a {d} here",
    "take your {d} up here",
    "you re going to turn {d}",
    "and make a {d} turn here",
    "it s going to be a {d} turn ahead",
    "go {d} at the next intersection",
    "you want to turn {d} here",
    "take the next {d}",
    "and you ll take a {d}",
]

_STRAIGHT_TEMPLATES = [
    "go straight",
    "keep going straight",
    "straight",
    "just go straight",
    "go straight through the intersection",
    "keep going",
    "continue straight ahead",
    "you re going to go straight here",
    "now go straight",
    "go straight as fast as you can",
    "that s good keep going straight",
    "stay on this road",
]

# authored ordinal templates; {o} is first/second, {d} the direction
_ORDINAL_TEMPLATES = [
    "take the {o} {d}",
    "you re going to take your {o} {d} up here",
    "turn {d} at the {o} intersection",
    "make a {d} at the {o} intersection",
    "it s the {o} {d}",
    "and take your {o} {d}",
]

_SECOND_EXTRA = [
    "go one more block and turn {d}",
    "pass this intersection and take the next {d}",
    "you re going to go a little bit further for one block and make a {d} at the intersection",
]


def _default_singles() -> dict:
    return {
        "left": [t.format(d="left") for t in _TURN_TEMPLATES],
        "right": [t.format(d="right") for t in _TURN_TEMPLATES],
        "straight": list(_STRAIGHT_TEMPLATES),
    }


def _default_ordinals() -> dict:
    out = {}
    for o in ("first", "second"):
        for d in ("left", "right"):
            derived = [t.format(d=f"{o} {d}") for t in _TURN_TEMPLATES]
            authored = [t.format(o=o, d=d) for t in _ORDINAL_TEMPLATES]
            if o == "second":
                authored += [t.format(d=d) for t in _SECOND_EXTRA]
            out[f"{o}_{d}"] = (derived, authored)
    return out


@dataclass(frozen=True)
class Instruction:
    text: str
    tokens: tuple        # ids into the vocabulary the bank was paired with
    keyword: Keyword
    misleading: bool = False


@dataclass(frozen=True)
class TemplateBank:
    singles: dict = field(default_factory=_default_singles)
    ordinals: dict = field(default_factory=_default_ordinals)
    connectives: tuple = CONNECTIVES

    def variants(self, keyword: Keyword) -> int:
        """Number of distinct sentences the keyword can render to."""
        if keyword.category == "single":
            return len(self.singles[keyword.parts[0]])
        if keyword.category == "double":
            a, b = keyword.parts
            return len(self.singles[a]) * len(self.connectives) * len(self.singles[b])
        groups = self.ordinals[keyword.name]
        return sum(len(g) for g in groups)

    def all_sentences(self) -> list:
        """Every renderable sentence; doubles contribute their parts."""
        out = []
        for lst in self.singles.values():
            out.extend(lst)
        for groups in self.ordinals.values():
            for g in groups:
                out.extend(g)
        out.extend(c for c in self.connectives if c)
        return out

    def check(self):
        for k in ALL_KEYWORDS:
            if self.variants(k) < 3:
                raise ValueError(f"keyword {k.name} has under 3 template variants")
        for s in self.all_sentences():
            if not s.strip():
                raise ValueError("empty template")


def render(bank: TemplateBank, keyword: Keyword, rng: np.random.Generator) -> str:
    if keyword.category == "single":
        pool = bank.singles[keyword.parts[0]]
        return pool[int(rng.integers(len(pool)))]
    if keyword.category == "double":
        a, b = keyword.parts
        first = bank.singles[a][int(rng.integers(len(bank.singles[a])))]
        second = bank.singles[b][int(rng.integers(len(bank.singles[b])))]
        conn = bank.connectives[int(rng.integers(len(bank.connectives)))]
        return f"{first} {conn} {second}" if conn else f"{first} {second}"
    if keyword.category == "ordinal":
        groups = bank.ordinals[keyword.name]
        g = groups[int(rng.integers(len(groups)))]
        return g[int(rng.integers(len(g)))]
    raise KeyError(f"unknown keyword category {keyword.category!r}")


def generate_instruction(bank: TemplateBank, vocab, keyword: Keyword,
                         rng: np.random.Generator,
                         misleading: bool = False) -> Instruction:
    text = render(bank, keyword, rng)
    return Instruction(text, tuple(vocab.tokenize(text)), keyword, misleading)


def bank_to_json(bank: TemplateBank) -> str:
    doc = {
        "format_version": 1,
        "connectives": list(bank.connectives),
        "single": {k: list(v) for k, v in sorted(bank.singles.items())},
        "ordinal": {k: [list(g) for g in v]
                    for k, v in sorted(bank.ordinals.items())},
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def bank_from_json(text: str) -> TemplateBank:
    doc = json.loads(text)
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported bank format {doc.get('format_version')!r}")
    return TemplateBank(
        singles={k: list(v) for k, v in doc["single"].items()},
        ordinals={k: tuple(list(g) for g in v) for k, v in doc["ordinal"].items()},
        connectives=tuple(doc["connectives"]),
    )
