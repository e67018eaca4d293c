"""Misleading instructions: command a direction the junction does not offer."""

from __future__ import annotations

import numpy as np

from ..world.network import RoadNetwork
from .keywords import DIRECTIONS, single
from .templates import Instruction, TemplateBank, generate_instruction


class NoMisleadingPossible(ValueError):
    """Junction offers every direction (or there is no junction ahead)."""


def impossible_directions(net: RoadNetwork, state) -> tuple:
    q = net.available_turns(state)
    if not q.at_junction:
        raise NoMisleadingPossible("no junction within lookahead")
    missing = tuple(d for d in DIRECTIONS if d not in q.turns)
    if not missing:
        raise NoMisleadingPossible(f"junction {q.node} offers every direction")
    return missing


def generate_misleading(bank: TemplateBank, vocab, net: RoadNetwork, state,
                        rng: np.random.Generator) -> Instruction:
    missing = impossible_directions(net, state)
    d = missing[int(rng.integers(len(missing)))]
    return generate_instruction(bank, vocab, single(d), rng, misleading=True)
