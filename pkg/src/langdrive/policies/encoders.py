"""Shared encoder pieces: instruction GRU with attention, conv image stack."""

from __future__ import annotations

import numpy as np

from ..config import ModelConfig
from ..neuralcore import ops
from ..neuralcore.params import ParamSet, add_conv, add_dense, add_gru, gru_view
from ..neuralcore.tensor import Tensor, as_tensor


def pad_tokens(token_lists, pad_to: int, cap: int = 40):
    """Right-pad token id lists to a common length.

    Returns (ids (B, T) int array, mask (B, T) float array). T grows past
    pad_to only when some sequence is longer; hard error past the cap.
    """
    if not token_lists:
        raise ValueError("no token sequences given")
    longest = max(len(t) for t in token_lists)
    if longest > cap:
        raise ValueError(f"instruction of {longest} tokens exceeds cap {cap}")
    if min(len(t) for t in token_lists) == 0:
        raise ValueError("empty token sequence")
    T = max(pad_to, longest)
    ids = np.zeros((len(token_lists), T), np.int64)
    mask = np.zeros((len(token_lists), T), np.float64)
    for i, toks in enumerate(token_lists):
        ids[i, :len(toks)] = toks
        mask[i, :len(toks)] = 1.0
    return ids, mask


def add_instruction_encoder(ps: ParamSet, rng, vocab_size: int, cfg: ModelConfig):
    table = np.asarray(rng.uniform(-0.1, 0.1, size=(vocab_size, cfg.embed_dim)))
    ps.add("instr.embed", table)
    add_gru(ps, "instr.gru", cfg.embed_dim, cfg.instr_hidden, rng)


def encode_instruction(ps: ParamSet, ids: np.ndarray, mask: np.ndarray):
    """Run the token GRU; attention over states with the final state as query.

    Returns (context (B, H), states (B, T, H)); padded steps are frozen so the
    final hidden is the state at each sequence's true end.
    """
    B, T = ids.shape
    emb = ops.embed(ps["instr.embed"], ids)              # (B, T, E)
    gru = gru_view(ps, "instr.gru")
    H = ps["instr.gru.uz"].shape[0]
    h = as_tensor(np.zeros((B, H)))
    states = []
    for t in range(T):
        x_t = ops.getitem(emb, (slice(None), t))
        h = ops.masked_gru_step(gru, x_t, h, mask[:, t])
        states.append(ops.reshape(h, (B, 1, H)))
    states = ops.concat(states, axis=1)
    context, _w = ops.luong_attention(states, h, mask)
    return context, states


GRID_ROWS = 32   # observation raster, fixed by the renderer
GRID_COLS = 64


def conv_feature_shape(cfg: ModelConfig,
                       rows: int = GRID_ROWS, cols: int = GRID_COLS) -> tuple:
    h, w = rows, cols
    for _ in cfg.conv_channels:
        h = (h - cfg.conv_kernel) // cfg.conv_stride + 1
        w = (w - cfg.conv_kernel) // cfg.conv_stride + 1
    return cfg.conv_channels[-1], h, w


def add_image_encoder(ps: ParamSet, rng, cfg: ModelConfig, prefix: str = "img"):
    c_in = 1
    for i, c_out in enumerate(cfg.conv_channels):
        add_conv(ps, f"{prefix}.conv{i}", c_in, c_out, cfg.conv_kernel, rng)
        c_in = c_out
    c, h, w = conv_feature_shape(cfg)
    add_dense(ps, f"{prefix}.fc", c * h * w, cfg.image_dim, rng)


def conv_stack(ps: ParamSet, grid: np.ndarray, cfg: ModelConfig,
               prefix: str = "img") -> Tensor:
    """Grid (B, 1, rows, cols) float -> conv features (B, C, h, w)."""
    x = as_tensor(np.asarray(grid, float))
    for i in range(len(cfg.conv_channels)):
        x = ops.conv2d(x, ps[f"{prefix}.conv{i}.w"], ps[f"{prefix}.conv{i}.b"],
                       stride=cfg.conv_stride)
        x = ops.elu(x)
    return x


def image_vector(ps: ParamSet, feat: Tensor, cfg: ModelConfig,
                 prefix: str = "img") -> Tensor:
    B = feat.shape[0]
    flat = ops.reshape(feat, (B, int(np.prod(feat.shape[1:]))))
    return ops.elu(ops.dense(flat, ps[f"{prefix}.fc.w"], ps[f"{prefix}.fc.b"]))
