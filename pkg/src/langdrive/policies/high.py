"""High-level sub-task selection over {lanefollow, left, right, straight, finish}.

Three variants: h0 reads only the instruction, hi adds the gated-attention
image pathway, hih additionally feeds an embedding of the previous sub-task.
The decision GRU advances once per invocation (sub-task boundaries), not per
simulator tick.
"""

from __future__ import annotations

import numpy as np

from ..config import ModelConfig
from ..neuralcore import ops
from ..neuralcore.params import ParamSet, add_dense, add_gru, gru_view
from ..neuralcore.tensor import Tensor, as_tensor
from ..subtasks import SUBTASKS_EXT, SUBTASK_EXT_ID
from .encoders import (add_image_encoder, add_instruction_encoder, conv_stack,
                       encode_instruction, image_vector)

HIGH_VARIANTS = ("h0", "hi", "hih")


def subtask_onehot(name: str | None) -> np.ndarray:
    """(5,) one-hot of an extended sub-task; None means no history yet."""
    v = np.zeros(len(SUBTASKS_EXT))
    if name is not None:
        v[SUBTASK_EXT_ID[name]] = 1.0
    return v


class HighPolicy:
    def __init__(self, vocab_size: int, variant: str = "hih",
                 cfg: ModelConfig | None = None,
                 rng: np.random.Generator | None = None):
        if variant not in HIGH_VARIANTS:
            raise ValueError(f"unknown high-level variant {variant!r}")
        self.variant = variant
        self.cfg = cfg or ModelConfig()
        self.vocab_size = vocab_size
        rng = rng or np.random.default_rng(0)
        cfg = self.cfg
        ps = ParamSet()
        add_instruction_encoder(ps, rng, vocab_size, cfg)
        in_dim = cfg.instr_hidden
        if variant != "h0":
            add_image_encoder(ps, rng, cfg)
            add_dense(ps, "ga.gate", cfg.instr_hidden, cfg.conv_channels[-1], rng)
            in_dim += cfg.image_dim
        if variant == "hih":
            add_dense(ps, "prev.fc", len(SUBTASKS_EXT), cfg.prev_task_dim, rng)
            in_dim += cfg.prev_task_dim
        add_gru(ps, "decision.gru", in_dim, cfg.decision_hidden, rng)
        add_dense(ps, "decision.out", cfg.decision_hidden, len(SUBTASKS_EXT), rng)
        self.params = ps

    def init_hidden(self, batch: int = 1) -> Tensor:
        return as_tensor(np.zeros((batch, self.cfg.decision_hidden)))

    def forward(self, ids: np.ndarray, mask: np.ndarray,
                grids: np.ndarray | None, prev: np.ndarray, hidden: Tensor):
        """One decision step.

        ids/mask (B, T); grids (B, 1, rows, cols), ignored by h0; prev (B, 5)
        one-hot rows (zeros = no history), ignored below hih. Returns
        (logits (B, 5), hidden').
        """
        if ids.ndim != 2 or ids.shape[1] == 0:
            raise ValueError(f"bad token batch shape {ids.shape}")
        ps, cfg = self.params, self.cfg
        ctx, _states = encode_instruction(ps, ids, mask)
        parts = [ctx]
        if self.variant != "h0":
            feat = conv_stack(ps, grids, cfg)
            gated, _gate = ops.gated_attention(ctx, feat,
                                               ps["ga.gate.w"], ps["ga.gate.b"])
            parts.append(image_vector(ps, gated, cfg))
        if self.variant == "hih":
            prev_t = as_tensor(np.asarray(prev, float))
            parts.append(ops.dense(prev_t, ps["prev.fc.w"], ps["prev.fc.b"]))
        x = ops.concat(parts, axis=1) if len(parts) > 1 else parts[0]
        h = ops.gru_step(gru_view(ps, "decision.gru"), x, hidden)
        logits = ops.dense(h, ps["decision.out.w"], ps["decision.out.b"])
        return logits, h

    def decide(self, tokens, grid, prev_name: str | None,
               hidden: Tensor | None, allowed=None):
        """Single-sample pick: (sub-task name, hidden'). No graph is built.

        `allowed`, when given, names the turn directions the junction ahead
        actually offers; a left/right score outside it is dropped so the
        pick falls through to the next best option. Commanding a turn the
        geometry cannot honor would steer the vehicle off the road, and no
        amount of language should do that. Straight stays eligible either
        way: braking at a missing exit is the low level's job.
        """
        from ..neuralcore.tensor import no_grad
        if hidden is None:
            hidden = self.init_hidden(1)
        ids = np.array([tokens], np.int64)
        mask = np.ones_like(ids, np.float64)
        grids = None if grid is None else np.asarray(grid, float)[None, None]
        prev = subtask_onehot(prev_name)[None]
        with no_grad():
            logits, h = self.forward(ids, mask, grids, prev, hidden)
        scores = logits.data[0]
        if allowed is not None:
            scores = scores.copy()
            for name in ("left", "right"):
                if name not in allowed:
                    scores[SUBTASK_EXT_ID[name]] = -np.inf
        pick = int(np.argmax(scores))
        return SUBTASKS_EXT[pick], h
