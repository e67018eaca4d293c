"""Central finite-difference verification of the analytic gradients."""

import numpy as np

from .tensor import backward


def finite_difference_check(loss_fn, tensors, rng: np.random.Generator,
                            h: float = 1e-5, max_elements: int = 12) -> float:
    """Compare analytic gradients of loss_fn() against central differences.

    loss_fn rebuilds the graph on every call and returns a scalar Tensor whose
    value depends on the given tensors. Checks up to max_elements randomly
    chosen elements per tensor. Returns the worst relative error, where the
    denominator is floored at 1e-2 so near-zero gradients are judged on an
    absolute scale well above float64 differencing noise.
    """
    for t in tensors:
        t.grad = None
    loss = loss_fn()
    backward(loss)
    analytic = [np.array(t.grad, copy=True) if t.grad is not None else np.zeros_like(t.data)
                for t in tensors]

    worst = 0.0
    for t, ana in zip(tensors, analytic):
        flat = t.data.reshape(-1)
        n = flat.size
        picks = np.arange(n) if n <= max_elements else rng.choice(n, size=max_elements,
                                                                  replace=False)
        for idx in picks:
            orig = flat[idx]
            flat[idx] = orig + h
            f_plus = loss_fn().item()
            flat[idx] = orig - h
            f_minus = loss_fn().item()
            flat[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = ana.reshape(-1)[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-2)
            worst = max(worst, rel)
    return worst
