"""Kinematic bicycle dynamics at a fixed 10 Hz step."""

import math
from dataclasses import dataclass

from ..config import WorldConfig
from .geometry import wrap_angle


@dataclass
class WorldState:
    x: float
    y: float
    heading: float   # rad, ccw from +x, normalized to (-pi, pi]
    speed: float     # m/s, never negative
    tick: int = 0


@dataclass(frozen=True)
class Action:
    throttle: float  # [0, 1]
    steer: float     # [-1, 1], positive steers left


@dataclass
class Diagnostics:
    clamped: int = 0


def step(state: WorldState, action: Action, cfg: WorldConfig,
         diag: Diagnostics | None = None) -> WorldState:
    """Advance one tick by explicit Euler; all right-hand sides read the old state.

    Out-of-range inputs are clamped (counted in diag); NaN is rejected.
    """
    if math.isnan(action.throttle) or math.isnan(action.steer):
        raise ValueError(f"NaN in action {action}")
    phi = min(max(action.throttle, 0.0), 1.0)
    theta = min(max(action.steer, -1.0), 1.0)
    if diag is not None and (phi != action.throttle or theta != action.steer):
        diag.clamped += 1

    dt = cfg.dt
    new_speed = state.speed + (phi * cfg.accel_max - cfg.drag * state.speed) * dt
    new_speed = min(max(new_speed, 0.0), cfg.speed_max)
    new_heading = wrap_angle(
        state.heading + (state.speed / cfg.wheelbase) * math.tan(theta * cfg.steer_max) * dt)
    return WorldState(
        x=state.x + state.speed * math.cos(state.heading) * dt,
        y=state.y + state.speed * math.sin(state.heading) * dt,
        heading=new_heading,
        speed=new_speed,
        tick=state.tick + 1,
    )
