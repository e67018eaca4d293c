"""Low-level control policies: per-sub-task recurrent heads over conv features.

The same trunk is built twice per agent: kind="action" emits (throttle,
steer), kind="end" a sigmoid probability that the current sub-task is done.
The multi variant routes through one GRU per sub-task with shared output
dense; the ga variant replaces routing with channel gating by the sub-task
one-hot and a single shared GRU.
"""

from __future__ import annotations

import numpy as np

from ..config import ModelConfig
from ..neuralcore import ops
from ..neuralcore.params import ParamSet, add_dense, add_gru, gru_view
from ..neuralcore.tensor import Tensor, as_tensor, no_grad
from ..subtasks import SUBTASKS, SUBTASK_ID
from .encoders import add_image_encoder, conv_stack, image_vector

LOW_VARIANTS = ("multi", "ga")
LOW_KINDS = ("action", "end")


class LowPolicy:
    def __init__(self, kind: str = "action", variant: str = "multi",
                 cfg: ModelConfig | None = None,
                 rng: np.random.Generator | None = None):
        if kind not in LOW_KINDS:
            raise ValueError(f"unknown low-level kind {kind!r}")
        if variant not in LOW_VARIANTS:
            raise ValueError(f"unknown low-level variant {variant!r}")
        self.kind = kind
        self.variant = variant
        self.cfg = cfg or ModelConfig()
        rng = rng or np.random.default_rng(0)
        cfg = self.cfg
        ps = ParamSet()
        add_image_encoder(ps, rng, cfg)
        if variant == "multi":
            for st in SUBTASKS:
                add_gru(ps, f"head.{st}", cfg.image_dim, cfg.low_hidden, rng)
        else:
            add_dense(ps, "ga.gate", len(SUBTASKS), cfg.conv_channels[-1], rng)
            add_gru(ps, "head.shared", cfg.image_dim, cfg.low_hidden, rng)
        add_dense(ps, "out", cfg.low_hidden, 2 if kind == "action" else 1, rng)
        self.params = ps

    def init_hidden(self, batch: int = 1) -> Tensor:
        return as_tensor(np.zeros((batch, self.cfg.low_hidden)))

    def forward(self, grids: np.ndarray, subtask: str, hidden: Tensor):
        """(B, 1, rows, cols) grids under one sub-task -> (out, hidden').

        Batches are single-sub-task by construction; out is (B, 2) raw
        controls or (B, 1) end probability.
        """
        if subtask not in SUBTASK_ID:
            raise KeyError(f"unknown sub-task {subtask!r}")
        ps, cfg = self.params, self.cfg
        feat = conv_stack(ps, grids, cfg)
        if self.variant == "ga":
            onehot = np.zeros((grids.shape[0], len(SUBTASKS)))
            onehot[:, SUBTASK_ID[subtask]] = 1.0
            feat, _gate = ops.gated_attention(as_tensor(onehot), feat,
                                              ps["ga.gate.w"], ps["ga.gate.b"])
            head = "head.shared"
        else:
            head = f"head.{subtask}"
        vec = image_vector(ps, feat, cfg)
        h = ops.gru_step(gru_view(ps, head), vec, hidden)
        out = ops.dense(h, ps["out.w"], ps["out.b"])
        if self.kind == "end":
            out = ops.sigmoid(out)
        return out, h

    def act(self, grid: np.ndarray, subtask: str, hidden: Tensor):
        """Single-sample inference; returns (values (2,) or scalar, hidden')."""
        with no_grad():
            out, h = self.forward(np.asarray(grid, float)[None, None],
                                  subtask, hidden)
        vals = out.data[0]
        return (float(vals[0]) if self.kind == "end" else vals.copy()), h
