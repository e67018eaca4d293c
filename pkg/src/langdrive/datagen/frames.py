"""Packed frame storage for demonstration data.

Grids are bit-packed (2048 cells -> 256 bytes per camera) and stay packed in
memory; training unpacks per batch. A store is one npz of concatenated
per-frame arrays plus a JSON index carrying trajectory boundaries and
everything structural (snippets, segments, junction events, stop runs).
"""

from __future__ import annotations

import json
import os

import numpy as np

GRID_ROWS = 32
GRID_COLS = 64
PACKED_BYTES = GRID_ROWS * GRID_COLS // 8


def pack_grid(grid: np.ndarray) -> np.ndarray:
    """(rows, cols) uint8 0/1 -> (256,) uint8."""
    if grid.shape != (GRID_ROWS, GRID_COLS):
        raise ValueError(f"bad grid shape {grid.shape}")
    return np.packbits(grid.astype(np.uint8).ravel())


def unpack_grid(packed: np.ndarray) -> np.ndarray:
    return np.unpackbits(packed)[: GRID_ROWS * GRID_COLS].reshape(
        GRID_ROWS, GRID_COLS)


def unpack_batch(packed: np.ndarray) -> np.ndarray:
    """(..., 256) uint8 -> (..., rows, cols) float64 in {0, 1}."""
    flat = np.unpackbits(packed, axis=-1)
    return flat.reshape(*packed.shape[:-1], GRID_ROWS, GRID_COLS).astype(float)


class FrameStore:
    """Concatenated frames of many trajectories with O(1) trajectory slicing.

    grids: (N, 3, 256) uint8, camera order (-yaw, 0, +yaw)
    actions: (N, 2) float32; subtasks: (N,) uint8 (255 = stop-run marker)
    end: (N,) uint8; offsets: (T+1,) int64 trajectory boundaries
    """

    def __init__(self, grids, actions, subtasks, end, offsets, meta):
        self.grids = grids
        self.actions = actions
        self.subtasks = subtasks
        self.end = end
        self.offsets = offsets
        self.meta = meta        # parsed index.json dict
        n = len(grids)
        if not (len(actions) == len(subtasks) == len(end) == n):
            raise ValueError("frame array lengths disagree")
        if offsets[0] != 0 or offsets[-1] != n:
            raise ValueError("trajectory offsets do not tile the arrays")

    @property
    def n_frames(self) -> int:
        return len(self.grids)

    @property
    def n_trajectories(self) -> int:
        return len(self.offsets) - 1

    def traj_slice(self, t: int) -> slice:
        return slice(int(self.offsets[t]), int(self.offsets[t + 1]))

    def traj_len(self, t: int) -> int:
        return int(self.offsets[t + 1] - self.offsets[t])


def save_store(dirpath, store: FrameStore):
    os.makedirs(dirpath, exist_ok=True)
    np.savez(os.path.join(dirpath, "frames.npz"),
             grids=store.grids, actions=store.actions,
             subtasks=store.subtasks, end=store.end, offsets=store.offsets)
    with open(os.path.join(dirpath, "index.json"), "w") as f:
        json.dump(store.meta, f, indent=1, sort_keys=True)


def load_store(dirpath) -> FrameStore:
    with open(os.path.join(dirpath, "index.json")) as f:
        meta = json.load(f)
    if meta.get("format_version") != 1:
        raise ValueError(f"unsupported dataset format {meta.get('format_version')!r}")
    z = np.load(os.path.join(dirpath, "frames.npz"))
    return FrameStore(z["grids"], z["actions"], z["subtasks"], z["end"],
                      z["offsets"], meta)
