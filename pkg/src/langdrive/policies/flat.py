"""Flat baseline: one recurrent policy from instruction and image to control.

No sub-task decomposition, no end signal; the GRU runs every tick. The
history variant feeds back the previous action through a small embedding.
"""

from __future__ import annotations

import numpy as np

from ..config import ModelConfig
from ..neuralcore import ops
from ..neuralcore.params import ParamSet, add_dense, add_gru, gru_view
from ..neuralcore.tensor import Tensor, as_tensor, no_grad
from .encoders import (add_image_encoder, add_instruction_encoder, conv_stack,
                       encode_instruction, image_vector)

FLAT_VARIANTS = ("plain", "history")


class FlatPolicy:
    def __init__(self, vocab_size: int, variant: str = "plain",
                 cfg: ModelConfig | None = None,
                 rng: np.random.Generator | None = None):
        if variant not in FLAT_VARIANTS:
            raise ValueError(f"unknown flat variant {variant!r}")
        self.variant = variant
        self.cfg = cfg or ModelConfig()
        self.vocab_size = vocab_size
        rng = rng or np.random.default_rng(0)
        cfg = self.cfg
        ps = ParamSet()
        add_instruction_encoder(ps, rng, vocab_size, cfg)
        add_image_encoder(ps, rng, cfg)
        add_dense(ps, "ga.gate", cfg.instr_hidden, cfg.conv_channels[-1], rng)
        in_dim = cfg.instr_hidden + cfg.image_dim
        if variant == "history":
            add_dense(ps, "prev.fc", 2, cfg.prev_task_dim, rng)
            in_dim += cfg.prev_task_dim
        add_gru(ps, "trunk", in_dim, cfg.decision_hidden, rng)
        add_dense(ps, "out", cfg.decision_hidden, 2, rng)
        self.params = ps

    def init_hidden(self, batch: int = 1) -> Tensor:
        return as_tensor(np.zeros((batch, self.cfg.decision_hidden)))

    def encode(self, ids: np.ndarray, mask: np.ndarray) -> Tensor:
        ctx, _ = encode_instruction(self.params, ids, mask)
        return ctx

    def step(self, ctx: Tensor, grids: np.ndarray, hidden: Tensor,
             prev_action: np.ndarray | None = None):
        """One tick given a precomputed instruction context. -> (action, h')."""
        ps, cfg = self.params, self.cfg
        feat = conv_stack(ps, grids, cfg)
        gated, _g = ops.gated_attention(ctx, feat, ps["ga.gate.w"], ps["ga.gate.b"])
        parts = [ctx, image_vector(ps, gated, cfg)]
        if self.variant == "history":
            if prev_action is None:
                prev_action = np.zeros((grids.shape[0], 2))
            prev_t = as_tensor(np.asarray(prev_action, float))
            parts.append(ops.dense(prev_t, ps["prev.fc.w"], ps["prev.fc.b"]))
        x = ops.concat(parts, axis=1)
        h = ops.gru_step(gru_view(ps, "trunk"), x, hidden)
        return ops.dense(h, ps["out.w"], ps["out.b"]), h

    def forward(self, ids, mask, grids, hidden, prev_action=None):
        """Convenience single call: encodes the instruction every invocation."""
        return self.step(self.encode(ids, mask), grids, hidden, prev_action)

    def act(self, tokens, grid, hidden: Tensor, prev_action=None):
        ids = np.array([tokens], np.int64)
        mask = np.ones_like(ids, np.float64)
        with no_grad():
            out, h = self.forward(ids, mask,
                                  np.asarray(grid, float)[None, None],
                                  hidden,
                                  None if prev_action is None
                                  else np.asarray(prev_action)[None])
        return out.data[0].copy(), h
