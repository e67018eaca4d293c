"""Batch samplers over an annotated FrameStore.

Four batch families: action windows (one sub-task head at a time, camera
augmentation with steering correction, loss weights on core frames only),
stop-signal windows (center camera, positive tail oversampled), high-level
decision sequences (per-junction instruction plus jittered boundary
observations, optionally deceptive), and flat command windows (instruction
plus a dense action trace across one junction).
"""

from __future__ import annotations

import numpy as np

from ..config import RunConfig
from ..language import (Instruction, double, eligible_keywords,
                        generate_instruction, single)
from ..policies.encoders import pad_tokens
from ..policies.high import subtask_onehot
from ..subtasks import SUBTASKS, SUBTASK_EXT_ID, SUBTASK_ID
from .collect import STOP_MARKER
from .frames import FrameStore, unpack_batch

_CAM_STEER = (0.2, 0.0, -0.2)   # label correction per camera (-yaw, 0, +yaw)
_STOP_SHARE = 0.25              # braking windows mixed into turn-head action draws
_POS_TAIL = 0.5                 # stop-signal draws forced to end near the core end
_POS_WEIGHT = 8.0               # loss weight on positive stop-signal frames
_BOUNDARY_SHARE = 0.7           # flat windows anchored at the junction approach


class TrainingSampler:
    """Draws training batches from one store; all randomness via caller rng."""

    def __init__(self, store: FrameStore, bank, vocab, cfg: RunConfig):
        self.store = store
        self.bank = bank
        self.vocab = vocab
        self.cfg = cfg
        dcfg = cfg.data
        w_end = cfg.train.low_window
        self.action_pool = {s: [] for s in SUBTASKS}
        self.end_pool = {s: [] for s in SUBTASKS}
        self.stop_pool = {s: [] for s in SUBTASKS if s != "lanefollow"}
        self.seg_pool = {1: [], 2: []}
        self.mislead_pool = {1: [], 2: []}
        self.mislead_straight_pool = []
        self.flat_pool = []
        for ti, info in enumerate(store.meta["trajectories"]):
            if info["kind"] == "stop":
                for d in info["missing"]:
                    self.stop_pool[d].append((ti, info["entry"]))
                continue
            for sn in info["snippets"]:
                a, b = sn["core"]
                if b - a < dcfg.min_snippet_core:
                    continue
                self.action_pool[sn["subtask"]].append((ti, sn))
                if not sn["final"] and b >= w_end:
                    self.end_pool[sn["subtask"]].append((ti, sn))
            for seg in info["segments"]:
                n = len(seg["turns"])
                self.seg_pool[n].append((ti, seg))
                if seg["mislead"]:
                    self.mislead_pool[n].append((ti, seg))
                if seg["mislead_straight"]:
                    self.mislead_straight_pool.append((ti, seg))
                if n == 1:
                    self.flat_pool.append((ti, seg))
        # impossible-straight replays share the one-junction lie pool
        self._lie_pool = {1: self.mislead_pool[1] + self.mislead_straight_pool,
                          2: self.mislead_pool[2]}
        shapes = {k: len(v) for k, v in self.action_pool.items()}
        if min(shapes.values()) == 0:
            raise ValueError(f"empty sub-task pool: {shapes}")

    # -- shared helpers ----------------------------------------------------

    def _frames(self, ti: int, start: int, n: int, cam: int) -> np.ndarray:
        off = int(self.store.offsets[ti])
        packed = self.store.grids[off + start:off + start + n, cam]
        return unpack_batch(packed)[:, None]     # (n, 1, rows, cols)

    def _grid_at(self, ti: int, tick: int) -> np.ndarray:
        return self._frames(ti, tick, 1, 1)[0]

    def _clamp_start(self, ti: int, start: int, w: int) -> int:
        return int(np.clip(start, 0, self.store.traj_len(ti) - w))

    # -- low-level action heads --------------------------------------------

    def action_batch(self, subtask: str, rng: np.random.Generator):
        """(grids (B,W,1,R,C), targets (B,W,2), weights (B,W)) for one head."""
        tcfg = self.cfg.train
        w, bsz = tcfg.low_window, tcfg.low_batch
        grids = np.zeros((bsz, w, 1, 32, 64))
        targets = np.zeros((bsz, w, 2))
        weights = np.zeros((bsz, w))
        for i in range(bsz):
            use_stop = (subtask != "lanefollow" and self.stop_pool[subtask]
                        and rng.random() < _STOP_SHARE)
            cam = int(rng.integers(3))
            if use_stop:
                pool = self.stop_pool[subtask]
                ti, entry = pool[int(rng.integers(len(pool)))]
                hi = max(entry - 19, self.store.traj_len(ti) - w + 1)
                start = self._clamp_start(
                    ti, int(rng.integers(entry - 20, hi)), w)
                core = self.store.subtasks[self.store.traj_slice(ti)] == STOP_MARKER
                cam = 1          # braking demos are center-camera only
            else:
                pool = self.action_pool[subtask]
                ti, sn = pool[int(rng.integers(len(pool)))]
                (a, b), (c, _) = sn["core"], sn["ctx"]
                start = self._clamp_start(
                    ti, int(rng.integers(c, max(b - w, c) + 1)), w)
                core = np.zeros(self.store.traj_len(ti), bool)
                core[a:b] = True
            sl = self.store.traj_slice(ti)
            grids[i] = self._frames(ti, start, w, cam)
            targets[i] = self.store.actions[sl][start:start + w]
            targets[i, :, 1] = np.clip(targets[i, :, 1] + _CAM_STEER[cam],
                                       -1.0, 1.0)
            weights[i] = core[start:start + w]
        return grids, targets, weights

    # -- stop-signal head --------------------------------------------------

    def end_batch(self, subtask: str, rng: np.random.Generator):
        """(grids (B,W,1,R,C), labels (B,W), weights (B,W)); labels are 1 only
        on this snippet's closing frames, with pre-boundary history zeroed."""
        tcfg, dcfg = self.cfg.train, self.cfg.data
        w, bsz = tcfg.low_window, tcfg.low_batch
        span = dcfg.end_span
        grids = np.zeros((bsz, w, 1, 32, 64))
        labels = np.zeros((bsz, w))
        weights = np.ones((bsz, w))
        pool = self.end_pool[subtask]
        if not pool:
            raise ValueError(f"no completed snippets for {subtask!r}")
        for i in range(bsz):
            ti, sn = pool[int(rng.integers(len(pool)))]
            a, b = sn["core"]
            if rng.random() < _POS_TAIL:
                e = int(rng.integers(max(b - span + 1, a + 1), b + 1))
            else:
                e = int(rng.integers(min(a + span, b), b + 1))
            e = max(e, w)
            if e > self.store.traj_len(ti):
                e = self.store.traj_len(ti)
            start = e - w
            sl = self.store.traj_slice(ti)
            grids[i] = self._frames(ti, start, w, 1)
            lab = self.store.end[sl][start:e].astype(float)
            ticks = np.arange(start, e)
            lab[(ticks < a) | (ticks >= b)] = 0.0
            labels[i] = lab
            weights[i] = np.where(lab > 0, _POS_WEIGHT, 1.0)
        return grids, labels, weights

    # -- high-level decision sequences -------------------------------------

    def _segment_instruction(self, seg: dict, rng: np.random.Generator,
                             misleading: bool) -> Instruction:
        if misleading:
            if seg["mislead_straight"]:
                # straight is impossible here; phrase it either way
                kw = (single("straight") if rng.random() < 0.5
                      else double("straight", "straight"))
            else:
                m = seg["mislead"][int(rng.integers(len(seg["mislead"])))]
                kw = (single(m) if len(seg["turns"]) == 1
                      else double(m, seg["turns"][1]))
            return generate_instruction(self.bank, self.vocab, kw,
                                        rng, misleading=True)
        opts = eligible_keywords(tuple(seg["turns"]))
        kw = opts[int(rng.integers(len(opts)))]
        return generate_instruction(self.bank, self.vocab, kw, rng)

    def high_batch(self, rng: np.random.Generator, n_turns: int = 1,
                   misleading: bool = False):
        """One teacher-forced decision-sequence batch.

        Returns (ids, mask, grids (B,S,1,R,C), prev (B,S,5), targets (B,S))
        with S = n_turns * 2 + 2. When `misleading` is set, a fraction of
        rows carry a deceptive instruction: a turn that does not exist at
        the first junction (correct pick is the straight crossing actually
        driven) or a straight command where straight is impossible (correct
        pick is still straight; its control head brakes there). Either way
        the junction-decision target becomes straight; later steps keep the
        replayed labels, which the stopped vehicle never reaches.
        """
        tcfg = self.cfg.train
        bsz = tcfg.high_batch
        steps = n_turns * 2 + 2
        pool = self.seg_pool[n_turns]
        if not pool:
            raise ValueError(f"no segments with {n_turns} junctions")
        grids = np.zeros((bsz, steps, 1, 32, 64))
        prev = np.zeros((bsz, steps, len(subtask_onehot(None))))
        targets = np.zeros((bsz, steps), np.int64)
        token_rows = []
        for i in range(bsz):
            lie = (misleading and self._lie_pool[n_turns]
                   and rng.random() < tcfg.misleading_fraction)
            pool_i = self._lie_pool[n_turns] if lie else pool
            ti, seg = pool_i[int(rng.integers(len(pool_i)))]
            instr = self._segment_instruction(seg, rng, lie)
            token_rows.append(list(instr.tokens))
            prev_name = None
            for k, dec in enumerate(seg["decisions"]):
                tick = int(rng.integers(dec["lo"], dec["hi"] + 1))
                grids[i, k] = self._grid_at(ti, tick)
                prev[i, k] = subtask_onehot(prev_name)
                targets[i, k] = SUBTASK_EXT_ID[dec["target"]]
                prev_name = dec["target"]
            if lie:
                targets[i, 1] = SUBTASK_EXT_ID["straight"]
                prev[i, 2] = subtask_onehot("straight")
        ids, mask = pad_tokens(token_rows, self.cfg.model.token_pad,
                               self.cfg.model.token_cap)
        return ids, mask, grids, prev, targets

    # -- flat baseline windows ---------------------------------------------

    def flat_batch(self, rng: np.random.Generator):
        """(ids, mask, grids (B,W,1,R,C), prev_act (B,W,2), targets (B,W,2))."""
        tcfg = self.cfg.train
        w, bsz = tcfg.flat_window, tcfg.flat_batch
        grids = np.zeros((bsz, w, 1, 32, 64))
        prev_act = np.zeros((bsz, w, 2))
        targets = np.zeros((bsz, w, 2))
        token_rows = []
        for i in range(bsz):
            ti, seg = self.flat_pool[int(rng.integers(len(self.flat_pool)))]
            instr = self._segment_instruction(seg, rng, False)
            token_rows.append(list(instr.tokens))
            snips = self.store.meta["trajectories"][ti]["snippets"]
            lf1 = snips[seg["snips"][0]]
            turn_b = snips[seg["snips"][1]]["core"][0]
            if rng.random() < _BOUNDARY_SHARE:
                start = int(rng.integers(turn_b - 30, turn_b - 4))
            else:
                start = int(rng.integers(lf1["core"][0], lf1["core"][1]))
            start = self._clamp_start(ti, max(start, seg["bounds"][0]), w)
            sl = self.store.traj_slice(ti)
            grids[i] = self._frames(ti, start, w, 1)
            targets[i] = self.store.actions[sl][start:start + w]
            if start > 0:
                prev_act[i, 1:] = targets[i, :-1]
                prev_act[i, 0] = self.store.actions[sl][start - 1]
            else:
                prev_act[i, 1:] = targets[i, :-1]
        ids, mask = pad_tokens(token_rows, self.cfg.model.token_pad,
                               self.cfg.model.token_cap)
        return ids, mask, grids, prev_act, targets
