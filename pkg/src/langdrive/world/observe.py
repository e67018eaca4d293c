"""Binary drivable-road observations rendered in the vehicle frame.

One channel, rows indexing forward distance (row 0 farthest ahead), columns
left to right. A cell is 1 exactly when its center lies inside a road polygon.
Side cameras are the same grid under a yawed virtual pose.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..config import WorldConfig
from .dynamics import WorldState
from .network import RoadNetwork

_CENTER_CACHE: dict[tuple, np.ndarray] = {}


def _cell_centers(cfg: WorldConfig) -> np.ndarray:
    """(rows*cols, 2) array of (forward, left) offsets of cell centers."""
    key = (cfg.grid_rows, cfg.grid_cols, cfg.cell_size)
    got = _CENTER_CACHE.get(key)
    if got is None:
        rows = np.arange(cfg.grid_rows)
        cols = np.arange(cfg.grid_cols)
        fwd = (cfg.grid_rows - rows - 0.5) * cfg.cell_size
        left = (cfg.grid_cols / 2.0 - cols - 0.5) * cfg.cell_size
        f, l = np.meshgrid(fwd, left, indexing="ij")
        got = np.stack([f.ravel(), l.ravel()], axis=1)
        _CENTER_CACHE[key] = got
    return got


@dataclass
class Observation:
    grid: np.ndarray          # uint8 (rows, cols)
    camera_yaw: float         # rad offset applied to the vehicle heading
    off_map: bool


def render_observation(net: RoadNetwork, state: WorldState, cfg: WorldConfig,
                       camera_yaw: float = 0.0) -> Observation:
    pos = np.array([state.x, state.y])
    if not net.in_bounds(pos):
        return Observation(np.zeros((cfg.grid_rows, cfg.grid_cols), np.uint8),
                           camera_yaw, True)
    h = state.heading + camera_yaw
    fwd = np.array([math.cos(h), math.sin(h)])
    left = np.array([-math.sin(h), math.cos(h)])
    local = _cell_centers(cfg)
    pts = pos + local[:, :1] * fwd + local[:, 1:] * left

    view_radius = float(np.hypot(cfg.grid_rows, cfg.grid_cols / 2.0) * cfg.cell_size) + 1.0
    near = np.linalg.norm(net.rect_centers - pos, axis=1) <= view_radius + net.rect_radii
    rects = net.rects[near]
    inside = np.zeros(len(pts), bool)
    for x0, y0, x1, y1 in rects:
        inside |= ((pts[:, 0] >= x0) & (pts[:, 0] <= x1) &
                   (pts[:, 1] >= y0) & (pts[:, 1] <= y1))
    grid = inside.reshape(cfg.grid_rows, cfg.grid_cols).astype(np.uint8)
    return Observation(grid, camera_yaw, False)


def camera_set(net: RoadNetwork, state: WorldState, cfg: WorldConfig) -> list[Observation]:
    """Center plus the two drift-simulation side cameras, in (-yaw, 0, +yaw) order."""
    yaw = math.radians(cfg.camera_yaw_deg)
    return [render_observation(net, state, cfg, c) for c in (-yaw, 0.0, yaw)]
