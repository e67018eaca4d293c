"""Training losses: L1 for control, clamped BCE for the end signal, CE for sub-tasks."""

import numpy as np

from .tensor import Tensor, as_tensor, make_node

BCE_EPS = 1e-7


def l1_loss(pred, target, weights=None) -> Tensor:
    """Mean absolute error; weights broadcast against pred and renormalize
    the mean, so 0/1 masks drop elements entirely."""
    pred = as_tensor(pred)
    target = np.asarray(target, dtype=pred.data.dtype)
    diff = pred.data - target
    if weights is None:
        out = np.array(np.abs(diff).mean())

        def bwd(g):
            pred.accumulate(g * np.sign(diff) / diff.size)
    else:
        w = np.broadcast_to(np.asarray(weights, dtype=float), diff.shape)
        total = w.sum()
        if total <= 0:
            raise ValueError("l1_loss needs at least one weighted element")
        out = np.array((w * np.abs(diff)).sum() / total)

        def bwd(g):
            pred.accumulate(g * w * np.sign(diff) / total)

    return make_node(out, (pred,), bwd)


def bce_loss(prob, target, weights=None) -> Tensor:
    """Binary cross-entropy on probabilities, clamped to [eps, 1-eps].

    weights broadcast against prob and renormalize the mean (rare positive
    frames get upweighted this way)."""
    prob = as_tensor(prob)
    target = np.asarray(target, dtype=prob.data.dtype)
    p = np.clip(prob.data, BCE_EPS, 1.0 - BCE_EPS)
    inside = (prob.data > BCE_EPS) & (prob.data < 1.0 - BCE_EPS)
    ll = -(target * np.log(p) + (1.0 - target) * np.log1p(-p))
    if weights is None:
        out = np.array(ll.mean())
        scale = np.full_like(p, 1.0 / p.size)
    else:
        w = np.broadcast_to(np.asarray(weights, dtype=float), p.shape)
        total = w.sum()
        if total <= 0:
            raise ValueError("bce_loss needs at least one weighted element")
        out = np.array((w * ll).sum() / total)
        scale = w / total

    def bwd(g):
        grad = (p - target) / (p * (1.0 - p)) * scale
        prob.accumulate(g * np.where(inside, grad, 0.0))

    return make_node(out, (prob,), bwd)


def ce_loss(logits, classes, weights=None) -> Tensor:
    """Softmax cross-entropy on logits (N,K) against integer classes (N,).

    weights, when given, multiply per-sample losses; the mean is taken over the
    weight total (masked batches pass 0/1 weights).
    """
    logits = as_tensor(logits)
    classes = np.asarray(classes, dtype=np.int64)
    n, k = logits.data.shape
    if classes.shape != (n,):
        raise ValueError(f"ce_loss shape mismatch: logits {logits.data.shape}, "
                         f"classes {classes.shape}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("ce_loss needs at least one positively weighted sample")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    out = np.array(-(w * logp[np.arange(n), classes]).sum() / total)

    def bwd(g):
        soft = np.exp(logp)
        soft[np.arange(n), classes] -= 1.0
        logits.accumulate(g * soft * (w / total)[:, None])

    return make_node(out, (logits,), bwd)
