"""Continuous driving session: one vehicle, one policy bundle, no episodes.

Mirrors the episodic executor's boundary rules: the selector runs only at
sub-task boundaries (session start and stop-signal votes), instruction
changes wait for the next boundary with the newest request winning, and a
`finish` pick drops the session back to idle lane following instead of
halting. All model and vehicle state lives here; callers drive `step()`
from a single thread.
"""

from __future__ import annotations

import hashlib
from collections import deque

import numpy as np

from ..config import RunConfig
from ..executor import EndVote
from ..subtasks import FINISH, LANEFOLLOW
from ..world import Action, render_observation, sample_spawn, step
from ..world.network import RoadNetwork, town_to_json
from .protocol import PROTOCOL_VERSION, TRAIL_CAP


def network_id(town: str, net: RoadNetwork) -> str:
    digest = hashlib.sha256(town_to_json(net).encode()).hexdigest()[:8]
    return f"{town}-{digest}"


class DriveSession:
    def __init__(self, bundle, net: RoadNetwork, town: str, cfg: RunConfig,
                 seed: int = 0):
        self.bundle = bundle
        self.net = net
        self.town = town
        self.cfg = cfg
        self.wcfg = cfg.world
        self.net_id = network_id(town, net)
        self.vote = EndVote(cfg.eval.vote_window, cfg.eval.vote_threshold)
        self.trail: deque = deque(maxlen=TRAIL_CAP)
        self.seed = seed
        self.reset(seed)

    def reset(self, seed: int | None = None):
        """Respawn and clear all instruction state; keeps the same network."""
        if seed is not None:
            self.seed = seed
        rng = np.random.default_rng([self.seed, 31])
        self.state, _ = sample_spawn(self.net, rng,
                                     clearance=self.cfg.eval.spawn_clearance)
        self.trail.clear()
        self.active_text = None
        self.tokens: list = []
        self.pending = None          # (text, tokens), newest submission wins
        self.subtask = LANEFOLLOW
        self.prev = None
        self.high_hidden = self.bundle.high.init_hidden()
        self._boundary = True
        self._reset_low()

    def _reset_low(self):
        self.h_act = self.bundle.low_action.init_hidden()
        self.h_end = self.bundle.low_end.init_hidden()
        self.vote.reset()

    def submit(self, text: str):
        """Queue an instruction for adoption at the next sub-task boundary."""
        self.pending = (text, list(self.bundle.vocab.tokenize(text)))

    def hello(self) -> dict:
        return {
            "type": "hello",
            "protocol": PROTOCOL_VERSION,
            "net_id": self.net_id,
            "town": self.town,
            "dt": float(self.wcfg.dt),
            "lane_width": float(self.wcfg.lane_width),
            "nodes": [[float(c) for c in n.pos] for n in self.net.nodes],
            "roads": [[[float(c) for c in p] for p in r.axis]
                      for r in self.net.roads],
        }

    def step(self) -> dict:
        """Advance one tick; returns the telemetry frame for it."""
        grid = render_observation(self.net, self.state, self.wcfg).grid
        if self._boundary:
            if self.pending is not None:
                self.active_text, self.tokens = self.pending
                self.pending = None
                self.high_hidden = self.bundle.high.init_hidden()
                self.prev = None
            name = LANEFOLLOW
            if self.tokens:
                edge = self.net.locate_edge((self.state.x, self.state.y),
                                            self.state.heading)
                name, self.high_hidden = self.bundle.high.decide(
                    self.tokens, grid, self.prev, self.high_hidden,
                    allowed=frozenset(self.net.exits_from(edge)))
            if name == FINISH:
                # instruction complete: back to idle lane following
                self.active_text = None
                self.tokens = []
                self.prev = None
                self.high_hidden = self.bundle.high.init_hidden()
                name = LANEFOLLOW
            self.subtask = name
            self._boundary = False
            self._reset_low()
        raw, self.h_act = self.bundle.low_action.act(grid, self.subtask,
                                                     self.h_act)
        prob, self.h_end = self.bundle.low_end.act(grid, self.subtask,
                                                   self.h_end)
        if self.vote.push(float(prob)):
            self.prev = self.subtask
            self._boundary = True
        act = Action(float(np.clip(raw[0], 0.0, 1.0)),
                     float(np.clip(raw[1], -1.0, 1.0)))
        self.state = step(self.state, act, self.wcfg)
        pose = [float(self.state.x), float(self.state.y),
                float(self.state.heading)]
        self.trail.append(pose)
        return {
            "type": "telemetry",
            "tick": int(self.state.tick),
            "pose": pose,
            "speed": float(self.state.speed),
            "subtask": self.subtask,
            "votes": [int(f) for f in self.vote.flags],
            "instruction": self.active_text,
            "net_id": self.net_id,
            "trail": list(self.trail),
        }
