"""Route-following PD expert used to generate demonstrations.

RoutePlan keeps an append-only sampled path through a sequence of planned
junction turns, with per-segment speed limits, a monotone projection cursor
(routes may revisit roads, so projection is windowed along arc length), and
region-based sub-task labels. expert_step turns the plan into throttle and
steer commands plus the label that supervises the policies.
"""

from __future__ import annotations

import numpy as np

from ..config import ExpertConfig, WorldConfig
from .dynamics import Action, WorldState
from .geometry import (corner_join, point_on_polyline, project_to_polyline,
                       unit)
from .network import RoadNetwork

TURN_ORDER = ("left", "straight", "right")

# search half-windows along arc length, m
_CURSOR_BACK = 5.0
_CURSOR_FWD = 15.0
_LOOKAHEAD_WIN = 8.0

_SHARP_BEND = 1.0 / 12.0    # rad/m; segments curving tighter than this get turn speed


class ExpertTrackingError(RuntimeError):
    """Vehicle drifted beyond the expert's lateral tolerance."""


class RouteStep:
    __slots__ = ("node", "turn", "edge_in", "edge_out")

    def __init__(self, node: int, turn: str, edge_in: int, edge_out: int):
        self.node = node
        self.turn = turn
        self.edge_in = edge_in
        self.edge_out = edge_out


def _leg_limits(pts: np.ndarray, base: float, turn_speed: float) -> np.ndarray:
    """Per-segment speed limits from discrete curvature along a leg."""
    n = len(pts) - 1
    lim = np.full(n, base)
    if n < 2:
        return lim
    seg = pts[1:] - pts[:-1]
    ln = np.linalg.norm(seg, axis=1)
    d = seg / np.maximum(ln, 1e-12)[:, None]
    dots = np.clip((d[:-1] * d[1:]).sum(axis=1), -1.0, 1.0)
    ang = np.arccos(dots)
    kappa = ang / np.maximum((ln[:-1] + ln[1:]) / 2.0, 1e-9)
    sharp = kappa > _SHARP_BEND
    lim[:-1][sharp] = np.minimum(lim[:-1][sharp], turn_speed)
    lim[1:][sharp] = np.minimum(lim[1:][sharp], turn_speed)
    return lim


class RoutePlan:
    """Turn decisions, path geometry and labels for one expert run."""

    def __init__(self, net: RoadNetwork, start_edge: int,
                 rng: np.random.Generator | None = None,
                 turns: list[str] | None = None,
                 wcfg: WorldConfig | None = None,
                 ecfg: ExpertConfig | None = None):
        self.net = net
        self.wcfg = wcfg or net.cfg
        self.ecfg = ecfg or ExpertConfig()
        self.rng = rng
        self.forced = list(turns or [])
        self.steps: list[RouteStep] = []
        self.active = 0              # index of the junction step ahead (or inside)
        self._inside = False
        self._tail_edge = start_edge
        self._legs: list[np.ndarray] = []
        self._leg_lims: list[np.ndarray] = []
        self._dirty = True
        self.path: np.ndarray | None = None
        self.cum: np.ndarray | None = None
        self.vlim: np.ndarray | None = None
        self.cursor: float | None = None
        self._prev_err: float | None = None
        e = net.edges[start_edge]
        self._append_leg(e.lane, _leg_limits(e.lane, self.ecfg.speed_lane,
                                             self.ecfg.speed_turn))
        self.ensure_horizon()

    # -- path assembly -----------------------------------------------------

    def _append_leg(self, pts: np.ndarray, lims: np.ndarray):
        pts = np.asarray(pts, float)
        if self._legs and np.allclose(self._legs[-1][-1], pts[0], atol=1e-9):
            pts = pts[1:]
        else:
            assert not self._legs or np.linalg.norm(
                self._legs[-1][-1] - pts[0]) < 1e-6, "path legs must be contiguous"
        self._legs.append(pts)
        self._leg_lims.append(np.asarray(lims, float))
        self._dirty = True

    def _flatten(self):
        if not self._dirty:
            return
        self.path = np.concatenate(self._legs, axis=0)
        self.vlim = np.concatenate(self._leg_lims)
        seg = np.linalg.norm(np.diff(self.path, axis=0), axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(seg)])
        self._dirty = False

    def _choose_turn(self, exits: dict[str, int]) -> str:
        options = [t for t in TURN_ORDER if t in exits]
        if self.forced:
            want = self.forced.pop(0)
            if want not in exits:
                raise ValueError(f"forced turn {want!r} not available; "
                                 f"junction offers {options}")
            return want
        if self.rng is not None:
            return options[int(self.rng.integers(len(options)))]
        return "straight" if "straight" in exits else options[0]

    def _extend(self):
        edge = self.net.edges[self._tail_edge]
        exits = self.net.exits_from(self._tail_edge)
        turn = self._choose_turn(exits)
        nxt = self.net.edges[exits[turn]]
        self.steps.append(RouteStep(edge.dst, turn, edge.idx, nxt.idx))
        conn = corner_join(edge.lane[-1], edge.end_dir, nxt.lane[0], nxt.start_dir)
        if turn == "straight":
            conn_lim = np.full(len(conn) - 1, self.ecfg.speed_straight_junction)
        else:
            conn_lim = np.full(len(conn) - 1, self.ecfg.speed_turn)
        self._append_leg(conn, conn_lim)
        self._append_leg(nxt.lane, _leg_limits(nxt.lane, self.ecfg.speed_lane,
                                               self.ecfg.speed_turn))
        self._tail_edge = nxt.idx

    def ensure_horizon(self, ahead: int = 2):
        while len(self.steps) < self.active + ahead:
            self._extend()
        self._flatten()

    # -- per-tick bookkeeping ----------------------------------------------

    def advance(self, pos: np.ndarray):
        """Update junction-region state; call once per tick before label()."""
        node = self.net.region_node(pos)
        step = self.steps[self.active]
        if not self._inside:
            if node == step.node:
                self._inside = True
        elif node != step.node:
            self._inside = False
            self.active += 1

    def label(self) -> str:
        return self.steps[self.active].turn if self._inside else "lanefollow"

    def project(self, pos: np.ndarray) -> tuple[float, float]:
        self._flatten()
        if self.cursor is None:
            s, off, _ = project_to_polyline(self.path, self.cum, pos)
        else:
            s, off, _ = project_to_polyline(self.path, self.cum, pos,
                                            self.cursor - _CURSOR_BACK,
                                            self.cursor + _CURSOR_FWD)
        self.cursor = s
        return s, off

    def lateral_error(self, probe: np.ndarray, s_guess: float) -> float:
        _, off, _ = project_to_polyline(self.path, self.cum, probe,
                                        s_guess - _LOOKAHEAD_WIN,
                                        s_guess + _LOOKAHEAD_WIN)
        return off

    def target_speed(self, s: float) -> float:
        lo = int(np.searchsorted(self.cum, s, side="right")) - 1
        hi = int(np.searchsorted(self.cum, s + self.ecfg.slow_distance,
                                 side="right")) - 1
        lo = max(lo, 0)
        hi = min(max(hi, lo), len(self.vlim) - 1)
        return float(self.vlim[lo:hi + 1].min())


def expert_step(plan: RoutePlan, state: WorldState) -> tuple[Action, str]:
    """One expert control decision. Raises ExpertTrackingError off-path."""
    ecfg, wcfg = plan.ecfg, plan.wcfg
    plan.ensure_horizon()
    pos = np.array([state.x, state.y])
    plan.advance(pos)
    s, off = plan.project(pos)
    if abs(off) > ecfg.offroad_tolerance:
        raise ExpertTrackingError(
            f"lateral offset {off:.2f} m at tick {state.tick} exceeds "
            f"{ecfg.offroad_tolerance} m")
    look = ecfg.lookahead_base + ecfg.lookahead_gain * state.speed
    hd = np.array([np.cos(state.heading), np.sin(state.heading)])
    err = plan.lateral_error(pos + look * hd, s + look)
    derr = 0.0 if plan._prev_err is None else (err - plan._prev_err) / wcfg.dt
    plan._prev_err = err
    steer = float(np.clip(-(ecfg.lateral_kp * err + ecfg.lateral_kd * derr),
                          -1.0, 1.0))
    vt = plan.target_speed(s)
    throttle = float(np.clip(ecfg.longitudinal_kp * (vt - state.speed), 0.0, 1.0))
    return Action(throttle, steer), plan.label()


# -- spawning -------------------------------------------------------------


def spawn_on_edge(net: RoadNetwork, edge_idx: int, s: float,
                  speed: float = 0.0) -> WorldState:
    e = net.edges[edge_idx]
    p = point_on_polyline(e.lane, e.cum, s)
    q = point_on_polyline(e.lane, e.cum, min(s + 0.5, e.length))
    d = unit(q - p) if np.linalg.norm(q - p) > 1e-9 else e.end_dir
    return WorldState(float(p[0]), float(p[1]),
                      float(np.arctan2(d[1], d[0])), speed, 0)


def sample_spawn(net: RoadNetwork, rng: np.random.Generator,
                 clearance: float = 15.0,
                 margin: float = 6.0) -> tuple[WorldState, int]:
    """Random pose on a lane with `clearance` m of runway to the junction ahead."""
    ok = [e.idx for e in net.edges if e.length >= clearance + margin + 2.0]
    if not ok:
        raise ValueError("no edge long enough for the requested clearance")
    idx = ok[int(rng.integers(len(ok)))]
    length = net.edges[idx].length
    s = margin + float(rng.random()) * (length - clearance - margin)
    return spawn_on_edge(net, idx, s), idx
