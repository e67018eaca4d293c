"""Differentiable operations: exactly the layer set the driving models need.

Dense, strided valid convolution, ELU, sigmoid/tanh, softmax, GRU step, Luong
attention, gated attention (channel-wise sigmoid gate), embedding lookup, plus
the shape plumbing (concat/reshape/slicing/reductions) that connects them.
"""

import numpy as np

from .tensor import Tensor, as_tensor, make_node, unbroadcast


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def bwd(g):
        a.accumulate(unbroadcast(g, a.data.shape))
        b.accumulate(unbroadcast(g, b.data.shape))

    return make_node(out_data, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def bwd(g):
        a.accumulate(unbroadcast(g * b.data, a.data.shape))
        b.accumulate(unbroadcast(g * a.data, b.data.shape))

    return make_node(out_data, (a, b), bwd)


def matmul(a, b) -> Tensor:
    """2-D matrix product (n, k) @ (k, m). Raises with both shapes on mismatch."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}")
    out_data = a.data @ b.data

    def bwd(g):
        a.accumulate(g @ b.data.T)
        b.accumulate(a.data.T @ g)

    return make_node(out_data, (a, b), bwd)


def dense(x, w, b) -> Tensor:
    """Affine layer x @ w + b with x of shape (batch, in)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 2 or x.data.shape[1] != w.data.shape[0]:
        raise ValueError(f"dense shape mismatch: input {x.data.shape}, weight {w.data.shape}")
    return add(matmul(x, w), b)


def elu(x, alpha: float = 1.0) -> Tensor:
    x = as_tensor(x)
    neg = x.data < 0
    out_data = np.where(neg, alpha * np.expm1(x.data), x.data)

    def bwd(g):
        x.accumulate(g * np.where(neg, out_data + alpha, 1.0))

    return make_node(out_data, (x,), bwd)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    out_data = 1.0 / (1.0 + np.exp(-x.data))

    def bwd(g):
        x.accumulate(g * out_data * (1.0 - out_data))

    return make_node(out_data, (x,), bwd)


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.tanh(x.data)

    def bwd(g):
        x.accumulate(g * (1.0 - out_data * out_data))

    return make_node(out_data, (x,), bwd)


def softmax(x) -> Tensor:
    """Softmax over the last axis, shift-stabilized."""
    x = as_tensor(x)
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    out_data = e / e.sum(axis=-1, keepdims=True)

    def bwd(g):
        dot = (g * out_data).sum(axis=-1, keepdims=True)
        x.accumulate(out_data * (g - dot))

    return make_node(out_data, (x,), bwd)


def log_softmax(x) -> Tensor:
    x = as_tensor(x)
    z = x.data - x.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    out_data = z - lse

    def bwd(g):
        soft = np.exp(out_data)
        x.accumulate(g - soft * g.sum(axis=-1, keepdims=True))

    return make_node(out_data, (x,), bwd)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    out_data = x.data.reshape(shape)

    def bwd(g):
        x.accumulate(g.reshape(x.data.shape))

    return make_node(out_data, (x,), bwd)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            t.accumulate(piece)

    return make_node(out_data, tuple(tensors), bwd)


def getitem(x, key) -> Tensor:
    """Basic indexing (ints and slices); gradient scatters back into place."""
    x = as_tensor(x)
    out_data = x.data[key]

    def bwd(g):
        full = np.zeros_like(x.data)
        full[key] = g
        x.accumulate(full)

    return make_node(out_data, (x,), bwd)


def reduce_sum(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out_data = x.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            x.accumulate(np.broadcast_to(g, x.data.shape).copy())
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        x.accumulate(np.broadcast_to(g, x.data.shape).copy())

    return make_node(out_data, (x,), bwd)


def reduce_mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    n = x.data.size if axis is None else x.data.shape[axis]
    return mul(reduce_sum(x, axis=axis, keepdims=keepdims), 1.0 / n)


def embed(table, ids) -> Tensor:
    """Row lookup into an embedding table; gradient scatter-adds into rows."""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    out_data = table.data[ids]

    def bwd(g):
        if not table.requires_grad:
            return
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))

    return make_node(out_data, (table,), bwd)


# -- convolution ---------------------------------------------------------------

def _extract_patches(x: np.ndarray, k: int, stride: int):
    b, c, h, w = x.shape
    oh = (h - k) // stride + 1
    ow = (w - k) // stride + 1
    patches = np.empty((b, c, k, k, oh, ow), dtype=x.dtype)
    for ki in range(k):
        for kj in range(k):
            patches[:, :, ki, kj] = x[:, :, ki:ki + (oh - 1) * stride + 1:stride,
                                         kj:kj + (ow - 1) * stride + 1:stride]
    return patches, oh, ow


def conv2d(x, w, b, stride: int = 1) -> Tensor:
    """Valid 2-D convolution, x (B,C,H,W), w (O,C,K,K), b (O,)."""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    bsz, c, h, wdt = x.data.shape
    oc, ic, k, k2 = w.data.shape
    if ic != c or k != k2:
        raise ValueError(f"conv2d shape mismatch: input {x.data.shape}, kernel {w.data.shape}")
    if h < k or wdt < k:
        raise ValueError(f"conv2d input {x.data.shape} smaller than kernel {w.data.shape}")
    patches, oh, ow = _extract_patches(x.data, k, stride)
    flat = patches.reshape(bsz, c * k * k, oh * ow)
    wm = w.data.reshape(oc, c * k * k)
    out_data = (wm[None] @ flat).reshape(bsz, oc, oh, ow) + b.data[None, :, None, None]

    def bwd(g):
        gf = g.reshape(bsz, oc, oh * ow)
        b.accumulate(g.sum(axis=(0, 2, 3)))
        w.accumulate(np.einsum("bop,bfp->of", gf, flat).reshape(w.data.shape))
        if x.requires_grad:
            dflat = np.einsum("of,bop->bfp", wm, gf)
            dp = dflat.reshape(bsz, c, k, k, oh, ow)
            dx = np.zeros_like(x.data)
            for ki in range(k):
                for kj in range(k):
                    dx[:, :, ki:ki + (oh - 1) * stride + 1:stride,
                           kj:kj + (ow - 1) * stride + 1:stride] += dp[:, :, ki, kj]
            x.accumulate(dx)

    return make_node(out_data, (x, w, b), bwd)


# -- recurrent and attention blocks -------------------------------------------

def gru_step(params: dict, x, h) -> Tensor:
    """One GRU step. Update gate z mixes the candidate in: h' = (1-z)*h + z*hcand.

    params holds wz,uz,bz / wr,ur,br / wh,uh,bh; x (B,in), h (B,hidden).
    """
    z = sigmoid(add(dense(x, params["wz"], params["bz"]), matmul(h, params["uz"])))
    r = sigmoid(add(dense(x, params["wr"], params["br"]), matmul(h, params["ur"])))
    cand = tanh(add(dense(x, params["wh"], params["bh"]), matmul(mul(r, h), params["uh"])))
    return add(mul(add(1.0, mul(z, -1.0)), h), mul(z, cand))


def masked_gru_step(params: dict, x, h, mask: np.ndarray) -> Tensor:
    """GRU step that freezes rows where mask == 0 (padded positions)."""
    m = Tensor(mask.reshape(-1, 1))
    h_new = gru_step(params, x, h)
    return add(mul(m, h_new), mul(add(1.0, mul(m, -1.0)), h))


def luong_attention(states, query, mask: np.ndarray | None = None):
    """Dot-product attention: states (B,T,D), query (B,D) -> (context (B,D), weights).

    Scores are plain dot products, softmax-normalized over T; padded positions
    (mask 0) are pushed to -1e9 before the softmax.
    """
    states, query = as_tensor(states), as_tensor(query)
    bsz, t, d = states.data.shape
    q3 = reshape(query, (bsz, 1, d))
    scores = reduce_sum(mul(states, q3), axis=2)            # (B,T)
    if mask is not None:
        scores = add(scores, (1.0 - np.asarray(mask, dtype=float)) * -1e9)
    weights = softmax(scores)                               # (B,T)
    w3 = reshape(weights, (bsz, t, 1))
    context = reduce_sum(mul(states, w3), axis=1)           # (B,D)
    return context, weights


def channel_gate(gate, feat) -> Tensor:
    """Scale each channel c of feat (B,C,H,W) by gate[:, c]; gate already in (0,1)."""
    gate, feat = as_tensor(gate), as_tensor(feat)
    b, c = gate.data.shape
    if feat.data.shape[:2] != (b, c):
        raise ValueError(f"channel_gate shape mismatch: gate {gate.data.shape}, "
                         f"features {feat.data.shape}")
    return mul(reshape(gate, (b, c, 1, 1)), feat)


def gated_attention(instr_vec, feat, w, b):
    """Sigmoid-gated channel attention: gate = sigmoid(instr_vec @ w + b), applied per channel."""
    gate = sigmoid(dense(instr_vec, w, b))
    return channel_gate(gate, feat), gate
