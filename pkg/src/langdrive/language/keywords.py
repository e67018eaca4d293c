"""Keyword taxonomy for driving instructions.

14 keywords: 3 single commands, 7 double combinations (doubles never start
with straight; those routes are phrased with an ordinal instead), and 4
ordinal forms naming the first or second of the two upcoming junctions.
"""

from __future__ import annotations

from dataclasses import dataclass

DIRECTIONS = ("left", "right", "straight")
_D = {"left": "l", "right": "r", "straight": "s"}


@dataclass(frozen=True)
class Keyword:
    category: str        # single | double | ordinal
    parts: tuple         # single: (dir,); double: (dir, dir); ordinal: (ord, dir)

    @property
    def name(self) -> str:
        return "_".join(self.parts)

    def turns(self) -> tuple:
        """Junction turn sequence this keyword commands."""
        if self.category == "single":
            return self.parts
        if self.category == "double":
            return self.parts
        ordinal, d = self.parts
        return (d,) if ordinal == "first" else ("straight", d)


def single(d: str) -> Keyword:
    return Keyword("single", (d,))


def double(d1: str, d2: str) -> Keyword:
    return Keyword("double", (d1, d2))


def ordinal(which: str, d: str) -> Keyword:
    return Keyword("ordinal", (which, d))


_DOUBLE_PAIRS = [("left", d) for d in DIRECTIONS] + \
                [("right", d) for d in DIRECTIONS] + [("straight", "straight")]

ALL_KEYWORDS = (
    [single(d) for d in DIRECTIONS]
    + [double(a, b) for a, b in _DOUBLE_PAIRS]
    + [ordinal(o, d) for o in ("first", "second") for d in ("left", "right")]
)

_BY_NAME = {k.name: k for k in ALL_KEYWORDS}


def keyword_by_name(name: str) -> Keyword:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown keyword {name!r}; have {sorted(_BY_NAME)}") from None


def eligible_keywords(turns) -> list:
    """Keywords whose commanded turn sequence equals `turns`.

    One turn: the single command, plus the first-ordinal form for left/right.
    Two turns: the double, except straight-then-turn which only exists as a
    second-ordinal phrase.
    """
    turns = tuple(turns)
    out = [k for k in ALL_KEYWORDS if k.turns() == turns]
    if not out:
        raise ValueError(f"no keyword encodes turn sequence {turns}")
    return out
