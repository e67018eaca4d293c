"""Evaluation protocol: instruction-conditioned episodes, geometric judging.

Task sampling walks the road graph from a random spawn so every commanded
turn sequence is actually drivable; infeasible spawns are redrawn. Success
for a hierarchical agent means finishing with exactly the commanded junction
traversals; a flat baseline (which never signals completion) passes if its
first traversals match the command. Per-episode seeds make reports
reproducible tick for tick.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..config import EvalConfig, RunConfig, config_hash
from ..executor import HierarchicalDriver, RegionTracker, run_episode
from ..language import (Instruction, TemplateBank, Vocabulary,
                        build_vocabulary, double, generate_instruction,
                        ordinal, single)
from ..policies.bundle import PolicyBundle
from ..policies.flat import FlatPolicy
from ..world import Action, step
from ..world.expert import RoutePlan, TURN_ORDER, expert_step, sample_spawn
from ..world.network import RoadNetwork, build_town

EVAL_TYPES = ("single", "double", "ordinal", "all")
_TOWN_TAG = {"A": 0, "B": 1}
_TYPE_TAG = {"single": 0, "double": 1, "ordinal": 2, "all": 3, "mislead": 4}


@dataclass
class FlatAgent:
    """A single-level policy plus its vocabulary, evaluated like a bundle."""
    policy: FlatPolicy
    vocab: Vocabulary


class OracleAgent:
    """Sentinel: episodes are driven by the scripted expert instead of a
    learned policy. Reference upper bound for the protocol itself."""


class FlatDriver:
    """Tick adapter giving a flat policy the executor's driver interface."""

    def __init__(self, policy: FlatPolicy):
        self.policy = policy
        self.reset([])

    def reset(self, tokens):
        self.tokens = list(tokens)
        self.hidden = self.policy.init_hidden()
        self.prev = None

    def set_instruction(self, tokens):
        # no sub-task boundaries to wait for; adopt immediately
        self.tokens = list(tokens)

    def tick(self, grid):
        raw, self.hidden = self.policy.act(self.tokens, grid, self.hidden,
                                           self.prev)
        act = Action(float(np.clip(raw[0], 0.0, 1.0)),
                     float(np.clip(raw[1], -1.0, 1.0)))
        self.prev = np.array([act.throttle, act.steer])
        return act, {"subtask": "flat", "invoked": False, "end_prob": 0.0}


# -- task sampling ---------------------------------------------------------

@dataclass
class Task:
    state: object
    edge: int
    instruction: Instruction
    expected: tuple
    kind: str           # single | double | ordinal | mislead_turn | mislead_straight


def _pick(seq, rng):
    return seq[int(rng.integers(len(seq)))]


def sample_task(net: RoadNetwork, rng, ltype: str, bank, vocab,
                ecfg: EvalConfig) -> Task:
    """Draw a spawn pose and a feasible instruction of the requested type."""
    if ltype == "all":
        ltype = _pick(EVAL_TYPES[:3], rng)
    for _ in range(200):
        state, edge = sample_spawn(net, rng, clearance=ecfg.spawn_clearance)
        exits1 = net.exits_from(edge)
        if ltype == "single":
            d = _pick(sorted(exits1), rng)
            kw, expected = single(d), (d,)
        elif ltype == "double":
            pairs = []
            for d1 in sorted(exits1):
                for d2 in sorted(net.exits_from(exits1[d1])):
                    if d1 != "straight" or d2 == "straight":
                        pairs.append((d1, d2))
            if not pairs:
                continue
            d1, d2 = _pick(pairs, rng)
            kw, expected = double(d1, d2), (d1, d2)
        else:
            options = [(ordinal("first", d), (d,))
                       for d in ("left", "right") if d in exits1]
            if "straight" in exits1:
                exits2 = net.exits_from(exits1["straight"])
                options += [(ordinal("second", d), ("straight", d))
                            for d in ("left", "right") if d in exits2]
            if not options:
                continue
            kw, expected = _pick(options, rng)
        instr = generate_instruction(bank, vocab, kw, rng)
        return Task(state, edge, instr, expected, ltype)
    raise RuntimeError(f"no feasible {ltype} task found")


def sample_misleading_task(net: RoadNetwork, rng, bank, vocab,
                           ecfg: EvalConfig) -> Task:
    """Double instruction whose first element is impossible at the next
    junction: a missing turn (correct reaction: cross straight, then obey
    the second element) or a missing straight (correct reaction: stop)."""
    for _ in range(200):
        state, edge = sample_spawn(net, rng, clearance=ecfg.spawn_clearance)
        exits1 = net.exits_from(edge)
        missing = [d for d in TURN_ORDER if d not in exits1]
        if not missing:
            continue
        m = _pick(missing, rng)
        if m == "straight":
            kw, expected, kind = (double("straight", "straight"), (),
                                  "mislead_straight")
        else:
            if "straight" not in exits1:
                continue
            d2 = _pick(sorted(net.exits_from(exits1["straight"])), rng)
            kw, expected, kind = double(m, d2), ("straight", d2), "mislead_turn"
        instr = generate_instruction(bank, vocab, kw, rng, misleading=True)
        return Task(state, edge, instr, expected, kind)
    raise RuntimeError("no deficient junction approach found")


# -- judging ---------------------------------------------------------------

def judge(log, task: Task, flat: bool) -> bool:
    turns = tuple(ev["turn"] for ev in log.traversals)
    n = len(task.expected)
    if task.kind == "mislead_straight":
        return (log.status == "stalled" and turns == ()
                and log.final_speed < 0.2)
    if flat:
        return (log.status in ("overran", "budget")
                and len(turns) >= n and turns[:n] == task.expected)
    return log.status == "finished" and turns == task.expected


# -- episode runners -------------------------------------------------------

def _oracle_episode(net: RoadNetwork, task: Task, budget: int, wcfg):
    """Drive the task with the scripted expert and write a judgeable log."""
    from ..executor import EpisodeLog
    rng = np.random.default_rng(0)
    plan = RoutePlan(net, task.edge, rng=rng, turns=list(task.expected))
    tracker = RegionTracker(net)
    state = task.state
    log = EpisodeLog()
    for t in range(budget):
        tracker.update(state)
        if (len(tracker.traversals) == len(task.expected)
                and tracker.region is None):
            log.status = "finished"
            break
        act, _label = expert_step(plan, state)
        state = step(state, act, wcfg)
    log.ticks = t
    log.traversals = tracker.traversals
    log.final_speed = float(state.speed)
    log.path = np.zeros((0, 4))
    log.actions = np.zeros((0, 2), np.float32)
    return log


def run_task(agent, net: RoadNetwork, task: Task, cfg: RunConfig,
             stall_ticks: int | None = 150):
    budget = cfg.eval.budget_ticks
    if isinstance(agent, OracleAgent):
        return _oracle_episode(net, task, budget, cfg.world), False
    if isinstance(agent, FlatAgent):
        driver, flat = FlatDriver(agent.policy), True
    else:
        driver, flat = HierarchicalDriver.from_bundle(
            agent, cfg.eval.vote_window, cfg.eval.vote_threshold), False
    log = run_episode(driver, net, task.state, list(task.instruction.tokens),
                      budget, cfg.world, expected=task.expected,
                      stall_ticks=stall_ticks)
    return log, flat


# -- cells and reports -----------------------------------------------------

def _episode_record(ep: int, task: Task, log, ok: bool) -> dict:
    return {
        "episode": ep,
        "kind": task.kind,
        "keyword": task.instruction.keyword.name,
        "text": task.instruction.text,
        "expected": list(task.expected),
        "status": log.status,
        "traversals": [ev["turn"] for ev in log.traversals],
        "ticks": log.ticks,
        "final_speed": round(log.final_speed, 3),
        "success": ok,
    }


def eval_cell(agent, net: RoadNetwork, town: str, ltype: str,
              n_episodes: int, seed: int, cfg: RunConfig, bank, vocab,
              progress=None) -> dict:
    """One (language type x town) cell: n episodes, fresh seed per episode."""
    mislead = ltype == "mislead"
    successes = 0
    failures = []
    ticks = []
    stop_eps, stop_top_speed, offroad = 0, 0.0, 0
    for ep in range(n_episodes):
        rng = np.random.default_rng(
            [seed, _TOWN_TAG[town], _TYPE_TAG[ltype], ep])
        if mislead:
            task = sample_misleading_task(net, rng, bank, vocab, cfg.eval)
        else:
            task = sample_task(net, rng, ltype, bank, vocab, cfg.eval)
        log, flat = run_task(agent, net, task, cfg,
                             stall_ticks=80 if mislead else 150)
        ok = judge(log, task, flat)
        successes += ok
        ticks.append(log.ticks)
        if log.status == "offroad":
            offroad += 1
        if task.kind == "mislead_straight":
            stop_eps += 1
            stop_top_speed = max(stop_top_speed, log.final_speed)
        if not ok:
            failures.append(_episode_record(ep, task, log, ok))
        if progress is not None:
            progress(town, ltype, ep + 1, n_episodes)
    cell = {
        "town": town,
        "language_type": ltype,
        "episodes": n_episodes,
        "successes": successes,
        "rate": round(successes / n_episodes, 4),
        "mean_ticks": round(float(np.mean(ticks)), 1),
        "failures": failures,
    }
    if mislead:
        cell["offroad_events"] = offroad
        cell["stop_episodes"] = stop_eps
        cell["stop_top_final_speed"] = round(stop_top_speed, 3)
    return cell


@dataclass
class EvalReport:
    config_hash: str
    label: str
    cells: dict = field(default_factory=dict)    # "town/type" -> cell

    def add(self, cell: dict):
        self.cells[f"{cell['town']}/{cell['language_type']}"] = cell

    def rate(self, town: str, ltype: str) -> float:
        return self.cells[f"{town}/{ltype}"]["rate"]

    def to_doc(self) -> dict:
        return {"config_hash": self.config_hash, "label": self.label,
                "cells": self.cells}

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=1, sort_keys=True)

    @classmethod
    def from_doc(cls, doc: dict) -> "EvalReport":
        return cls(doc["config_hash"], doc["label"], dict(doc["cells"]))

    def table(self) -> str:
        towns = sorted({c["town"] for c in self.cells.values()})
        types = [t for t in list(EVAL_TYPES) + ["mislead"]
                 if any(c["language_type"] == t for c in self.cells.values())]
        return render_table(
            [self.label], towns, types,
            lambda _m, tw, ty: self.cells.get(f"{tw}/{ty}"))


def render_table(models, towns, types, cell_of) -> str:
    """Aligned plain-text grid: one row per model, one column per cell."""
    cols = [f"{tw}/{ty}" for tw in towns for ty in types]
    width = max([len(c) for c in cols] + [7])
    name_w = max([len(m) for m in models] + [5])
    head = "model".ljust(name_w) + "".join(c.rjust(width + 2) for c in cols)
    lines = [head, "-" * len(head)]
    for m in models:
        row = m.ljust(name_w)
        for tw in towns:
            for ty in types:
                cell = cell_of(m, tw, ty)
                txt = "-" if cell is None else f"{cell['rate']:.3f}"
                row += txt.rjust(width + 2)
        lines.append(row)
    return "\n".join(lines)


def evaluate(agent, town: str = "A", language_type: str = "single",
             n_episodes: int | None = None, seed: int | None = None,
             cfg: RunConfig | None = None, label: str = "bundle",
             net: RoadNetwork | None = None, bank=None, vocab=None,
             progress=None) -> EvalReport:
    """Score one agent on one (town, language type) cell."""
    cfg = cfg or RunConfig()
    if n_episodes is None:
        n_episodes = cfg.eval.episodes_per_cell
    if seed is None:
        seed = cfg.train.seed
    net = net or build_town(town, cfg.train.seed, cfg.world)
    bank = bank or TemplateBank()
    vocab = vocab or build_vocabulary(bank)
    report = EvalReport(config_hash(cfg), label)
    if language_type == "mislead":
        cell = eval_cell(agent, net, town, "mislead", n_episodes, seed, cfg,
                         bank, vocab, progress)
    else:
        cell = eval_cell(agent, net, town, language_type, n_episodes, seed,
                         cfg, bank, vocab, progress)
    report.add(cell)
    return report


def misleading_eval(agent, town: str = "A", n_episodes: int | None = None,
                    seed: int | None = None, cfg: RunConfig | None = None,
                    label: str = "bundle", net=None, bank=None, vocab=None,
                    progress=None) -> EvalReport:
    """Deceptive-instruction suite; agent should stop or cross straight."""
    return evaluate(agent, town, "mislead", n_episodes, seed, cfg, label,
                    net, bank, vocab, progress)
