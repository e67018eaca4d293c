"""Expert demonstration collection.

Two trajectory kinds feed the dataset: roaming drives (random-turn expert
runs supplying lane keeping, turns and boundary structure) and braking runs
(approach a junction that lacks some exit direction, then release controls at
region entry and coast to a standstill). Braking frames teach the turn heads
what to do when the commanded direction does not exist: nothing.
"""

from __future__ import annotations

import numpy as np

from ..config import ExpertConfig, WorldConfig
from ..subtasks import SUBTASK_ID
from ..world import (Action, ExpertTrackingError, RoutePlan, camera_set,
                     expert_step, sample_spawn, spawn_on_edge, step)
from ..world.expert import TURN_ORDER
from ..world.network import RoadNetwork
from .frames import PACKED_BYTES, pack_grid

STOP_MARKER = 255          # subtask byte for braking-run frames

_STOP_SPEED = 0.05         # m/s, considered stationary
_STOP_CAP = 400            # safety bound on braking-run length, ticks


def _record(grids: np.ndarray, t: int, net: RoadNetwork, state, wcfg) -> None:
    for c, obs in enumerate(camera_set(net, state, wcfg)):
        grids[t, c] = pack_grid(obs.grid)


def collect_roam(net: RoadNetwork, rng: np.random.Generator, ticks: int,
                 wcfg: WorldConfig | None = None,
                 ecfg: ExpertConfig | None = None):
    """One random-turn expert drive.

    Returns (grids, actions, subtasks, info). Junction events are logged at
    each lanefollow -> turn transition with the directions the junction does
    not offer, which later marks segments usable for deceptive instructions.
    """
    wcfg = wcfg or net.cfg
    ecfg = ecfg or ExpertConfig()
    state, edge = sample_spawn(net, rng)
    plan = RoutePlan(net, edge, rng=rng, wcfg=wcfg, ecfg=ecfg)
    grids = np.zeros((ticks, 3, PACKED_BYTES), np.uint8)
    actions = np.zeros((ticks, 2), np.float32)
    subtasks = np.zeros(ticks, np.uint8)
    events = []
    prev = "lanefollow"
    n = ticks
    aborted = False
    for t in range(ticks):
        _record(grids, t, net, state, wcfg)
        try:
            act, lab = expert_step(plan, state)
        except ExpertTrackingError:
            n, aborted = t, True
            break
        if lab != prev and lab != "lanefollow":
            at = plan.steps[plan.active]
            missing = sorted(set(TURN_ORDER) - set(net.exits_from(at.edge_in)))
            events.append({"tick": t, "node": at.node, "turn": lab,
                           "missing": missing})
        prev = lab
        subtasks[t] = SUBTASK_ID[lab]
        actions[t] = (act.throttle, act.steer)
        state = step(state, act, wcfg)
    info = {"kind": "roam", "spawn_edge": edge, "events": events,
            "aborted": aborted}
    return grids[:n], actions[:n], subtasks[:n], info


def stop_approaches(net: RoadNetwork) -> list[int]:
    """Edges whose junction ahead lacks at least one exit direction."""
    return [e.idx for e in net.edges
            if len(net.exits_from(e.idx)) < len(TURN_ORDER)]


def collect_stop(net: RoadNetwork, edge_idx: int, rng: np.random.Generator,
                 wcfg: WorldConfig | None = None,
                 ecfg: ExpertConfig | None = None,
                 hold: int = 15):
    """One braking demonstration on the approach lane `edge_idx`.

    The expert drives toward the junction planning some turn it does offer;
    from region entry the controls are released (zero throttle, zero steer)
    and drag coasts the vehicle to rest, plus `hold` stationary frames.
    Frames from region entry on carry STOP_MARKER; the labels they train
    under (the junction's absent directions) live in the returned info.
    """
    wcfg = wcfg or net.cfg
    ecfg = ecfg or ExpertConfig()
    exits = net.exits_from(edge_idx)
    missing = sorted(set(TURN_ORDER) - set(exits))
    if not missing:
        raise ValueError(f"edge {edge_idx} offers every direction")
    options = [t for t in TURN_ORDER if t in exits]
    forced = options[int(rng.integers(len(options)))]
    e = net.edges[edge_idx]
    s = 2.0 + float(rng.random()) * max(e.length - 18.0, 0.5)
    state = spawn_on_edge(net, edge_idx, min(s, e.length - 10.0))
    plan = RoutePlan(net, edge_idx, turns=[forced], wcfg=wcfg, ecfg=ecfg)

    cap = _STOP_CAP + hold
    grids = np.zeros((cap, 3, PACKED_BYTES), np.uint8)
    actions = np.zeros((cap, 2), np.float32)
    subtasks = np.zeros(cap, np.uint8)
    entry = None
    held = 0
    n = cap
    for t in range(cap):
        _record(grids, t, net, state, wcfg)
        if entry is None:
            act, lab = expert_step(plan, state)
            if lab != "lanefollow":
                entry = t
        if entry is not None:
            act = Action(0.0, 0.0)
            subtasks[t] = STOP_MARKER
        else:
            subtasks[t] = SUBTASK_ID["lanefollow"]
        actions[t] = (act.throttle, act.steer)
        state = step(state, act, wcfg)
        if entry is not None and state.speed < _STOP_SPEED:
            held += 1
            if held >= hold:
                n = t + 1
                break
    if entry is None:
        raise RuntimeError(f"never reached the junction from edge {edge_idx}")
    info = {"kind": "stop", "spawn_edge": edge_idx,
            "node": e.dst, "turn": forced, "missing": missing, "entry": entry,
            "final_pos": [float(state.x), float(state.y)],
            "final_speed": float(state.speed)}
    return grids[:n], actions[:n], subtasks[:n], info
