"""Hierarchical execution: sub-task selection at boundaries, control per tick.

The driver is world-agnostic: the caller renders an observation grid each
tick and applies the returned action. The high-level model runs only at
sub-task boundaries (episode start and stop-signal votes); its recurrent
state persists across boundaries and resets when a new instruction is
adopted. Instruction changes requested mid-sub-task wait for the next
boundary, newest request first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import WorldConfig
from .subtasks import FINISH
from .world import Action, render_observation, step
from .world.network import RoadNetwork


class EndVote:
    """Majority vote over the most recent stop-signal outputs."""

    def __init__(self, window: int = 3, threshold: float = 0.5):
        self.window = window
        self.threshold = threshold
        self.flags: list[bool] = []

    def reset(self):
        self.flags = []

    def push(self, prob: float) -> bool:
        self.flags.append(prob >= self.threshold)
        self.flags = self.flags[-self.window:]
        return sum(self.flags) >= self.window // 2 + 1


class HierarchicalDriver:
    """Two-level policy execution over one instruction at a time."""

    def __init__(self, high, low_action, low_end,
                 vote_window: int = 3, vote_threshold: float = 0.5):
        self.high = high
        self.low_action = low_action
        self.low_end = low_end
        self.vote = EndVote(vote_window, vote_threshold)
        self.reset([])

    @classmethod
    def from_bundle(cls, bundle, vote_window: int = 3,
                    vote_threshold: float = 0.5) -> "HierarchicalDriver":
        return cls(bundle.high, bundle.low_action, bundle.low_end,
                   vote_window, vote_threshold)

    def reset(self, tokens):
        self.tokens = list(tokens)
        self.pending = None
        self.high_hidden = self.high.init_hidden()
        self.prev = None
        self.subtask = None
        self.finished = False
        self._boundary = True
        self._reset_low()

    def _reset_low(self):
        self.h_act = self.low_action.init_hidden()
        self.h_end = self.low_end.init_hidden()
        self.vote.reset()

    def set_instruction(self, tokens):
        """Replace the instruction at the next sub-task boundary."""
        self.pending = list(tokens)

    def tick(self, grid: np.ndarray, allowed=None):
        """One control step. Returns (Action | None, diag); None means done.

        `allowed` is the affordance hint forwarded to the selector at a
        boundary: the set of turn directions the junction ahead offers.
        """
        if self.finished:
            raise RuntimeError("episode already finished")
        invoked = False
        if self._boundary:
            if self.pending is not None:
                self.tokens = self.pending
                self.pending = None
                self.high_hidden = self.high.init_hidden()
                self.prev = None
            name, self.high_hidden = self.high.decide(
                self.tokens, grid, self.prev, self.high_hidden,
                allowed=allowed)
            invoked = True
            if name == FINISH:
                self.finished = True
                return None, {"subtask": FINISH, "invoked": True,
                              "end_prob": None}
            self.subtask = name
            self._boundary = False
            self._reset_low()
        raw, self.h_act = self.low_action.act(grid, self.subtask, self.h_act)
        prob, self.h_end = self.low_end.act(grid, self.subtask, self.h_end)
        if self.vote.push(prob):
            self.prev = self.subtask
            self._boundary = True
        act = Action(float(np.clip(raw[0], 0.0, 1.0)),
                     float(np.clip(raw[1], -1.0, 1.0)))
        return act, {"subtask": self.subtask, "invoked": invoked,
                     "end_prob": float(prob)}


class RegionTracker:
    """Geometric record of junction traversals and road containment.

    Entry and exit poses are matched to directed lanes; the traversal
    direction comes from the junction's exit table, so a judgement never
    trusts the policy's own labels.
    """

    def __init__(self, net: RoadNetwork):
        self.net = net
        self.region = None
        self.entry_edge = None
        self.traversals: list[dict] = []
        self.offroad = False

    def _classify(self, e_in, e_out) -> str:
        if e_in is None or e_out is None:
            return "invalid"
        for turn, idx in self.net.exits_from(e_in).items():
            if idx == e_out:
                return turn
        return "invalid"

    def update(self, state) -> dict | None:
        pos = np.array([state.x, state.y])
        if not self.net.on_road(pos):
            self.offroad = True
        node = self.net.region_node(pos)
        if self.region is None:
            if node is not None:
                self.region = node
                self.entry_edge = self.net.locate_edge(pos, state.heading)
            return None
        if node == self.region:
            return None
        exit_edge = self.net.locate_edge(pos, state.heading)
        ev = {"node": self.region,
              "turn": self._classify(self.entry_edge, exit_edge),
              "tick": int(state.tick)}
        self.traversals.append(ev)
        self.region = node
        self.entry_edge = exit_edge if node is not None else None
        return ev


@dataclass
class EpisodeLog:
    status: str = "budget"   # finished | offroad | wrong_turn | overran | stalled | budget
    ticks: int = 0
    traversals: list = field(default_factory=list)
    boundaries: list = field(default_factory=list)
    subtask_trace: list = field(default_factory=list)   # (tick, subtask)
    path: np.ndarray | None = None                      # (N, 4) x y heading speed
    actions: np.ndarray | None = None                   # (N, 2)
    final_speed: float = 0.0


def run_episode(driver: HierarchicalDriver, net: RoadNetwork, state,
                tokens, budget: int, wcfg: WorldConfig | None = None,
                expected: tuple | None = None,
                interrupts=(), stall_ticks: int | None = None) -> EpisodeLog:
    """Drive one episode to completion, abort, or budget exhaustion.

    `expected` enables early aborts: a traversal that is not a prefix of it
    stops the episode as wrong_turn, one past its length as overran.
    `interrupts` is a schedule of (tick, tokens) instruction replacements.
    `stall_ticks` ends the episode as stalled after that many consecutive
    near-standstill ticks (the agent has braked to a stop on purpose or
    wedged itself; either way nothing further will happen).
    """
    wcfg = wcfg or net.cfg
    driver.reset(tokens)
    tracker = RegionTracker(net)
    log = EpisodeLog()
    pending = sorted(interrupts, key=lambda it: it[0])
    path = np.zeros((budget, 4))
    acts = np.zeros((budget, 2), np.float32)
    last = None
    done = 0
    still = 0
    for t in range(budget):
        while pending and pending[0][0] <= t:
            driver.set_instruction(pending.pop(0)[1])
        still = still + 1 if state.speed < 0.05 else 0
        if stall_ticks is not None and still >= stall_ticks:
            log.status = "stalled"
            break
        ev = tracker.update(state)
        if tracker.offroad:
            log.status = "offroad"
            break
        if ev is not None and expected is not None:
            k = len(tracker.traversals) - 1
            if k >= len(expected):
                log.status = "overran"
                break
            if ev["turn"] != expected[k]:
                log.status = "wrong_turn"
                break
        obs = render_observation(net, state, wcfg)
        if obs.off_map:
            log.status = "offroad"
            break
        allowed = None
        if driver._boundary:
            edge = net.locate_edge((state.x, state.y), state.heading)
            allowed = frozenset(net.exits_from(edge))
        act, diag = driver.tick(obs.grid, allowed)
        if diag["invoked"]:
            log.boundaries.append(t)
            log.subtask_trace.append((t, diag["subtask"]))
        if act is None:
            log.status = "finished"
            break
        path[t] = (state.x, state.y, state.heading, state.speed)
        acts[t] = (act.throttle, act.steer)
        state = step(state, act, wcfg)
        last = state
        done = t + 1
    log.ticks = done
    log.traversals = tracker.traversals
    log.path = path[:done]
    log.actions = acts[:done]
    log.final_speed = float(last.speed) if last is not None else float(state.speed)
    return log
