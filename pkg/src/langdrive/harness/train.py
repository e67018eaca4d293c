"""Behaviour-cloning loops for the three policy levels.

Low-level heads fit expert controls (L1, loss mass on core frames only) and
the stop signal (BCE, positives upweighted). The high-level selector fits
sub-task picks at junction boundaries (CE over teacher-forced decision
sequences, alternating one- and two-junction segments). Flat baselines fit
the full control trace under the raw instruction. Every loop reports a loss
curve sampled every `eval_every` steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import RunConfig
from ..neuralcore import ops
from ..neuralcore.losses import bce_loss, ce_loss, l1_loss
from ..neuralcore.optim import Adam
from ..neuralcore.tensor import backward
from ..policies.bundle import PolicyBundle
from ..policies.flat import FlatPolicy
from ..policies.high import HighPolicy
from ..policies.low import LowPolicy
from ..subtasks import SUBTASKS

# weight-init stream tags, combined with the run seed so each model gets an
# independent but reproducible initialization
_ROLE = {"low_action": 11, "low_end": 12, "high": 13, "flat": 14}
_VARIANT = {"multi": 1, "ga": 2, "h0": 1, "hi": 2, "hih": 3,
            "plain": 1, "history": 2}


def init_rng(cfg: RunConfig, role: str, variant: str) -> np.random.Generator:
    return np.random.default_rng([cfg.train.seed, _ROLE[role],
                                  _VARIANT[variant]])


@dataclass
class TrainResult:
    name: str
    steps: int
    curve: list = field(default_factory=list)   # (step, mean loss since last)
    final_loss: float = 0.0


def _fit(policy, step_fn, steps: int, eval_every: int, name: str,
         lr: float, progress=None) -> TrainResult:
    opt = Adam(policy.params, lr)
    res = TrainResult(name, steps)
    acc, cnt = 0.0, 0
    for it in range(steps):
        opt.zero_grad()
        loss = step_fn(it)
        backward(loss)
        opt.step()
        acc += float(loss.data)
        cnt += 1
        if (it + 1) % eval_every == 0 or it + 1 == steps:
            mean = acc / cnt
            res.curve.append((it + 1, mean))
            res.final_loss = mean
            if progress is not None:
                progress(name, it + 1, steps, mean)
            acc, cnt = 0.0, 0
    return res


def _mean_of(terms):
    loss = terms[0]
    for term in terms[1:]:
        loss = ops.add(loss, term)
    return ops.mul(loss, 1.0 / len(terms))


def train_low_head(policy: LowPolicy, sampler, cfg: RunConfig,
                   rng: np.random.Generator, steps: int | None = None,
                   progress=None) -> TrainResult:
    """Fit one low-level head, visiting the four sub-tasks round-robin."""
    tcfg = cfg.train
    if steps is None:
        steps = tcfg.low_steps if policy.kind == "action" else tcfg.end_steps

    def step_fn(it):
        subtask = SUBTASKS[it % len(SUBTASKS)]
        if policy.kind == "action":
            grids, targets, weights = sampler.action_batch(subtask, rng)
        else:
            grids, targets, weights = sampler.end_batch(subtask, rng)
        h = policy.init_hidden(grids.shape[0])
        terms = []
        for t in range(grids.shape[1]):
            out, h = policy.forward(grids[:, t], subtask, h)
            w = weights[:, t]
            if w.sum() == 0:
                continue
            if policy.kind == "action":
                terms.append(l1_loss(out, targets[:, t], weights=w[:, None]))
            else:
                terms.append(bce_loss(out, targets[:, t][:, None],
                                      weights=w[:, None]))
        return _mean_of(terms)

    return _fit(policy, step_fn, steps, tcfg.eval_every,
                f"low_{policy.kind}_{policy.variant}", tcfg.learning_rate,
                progress)


def train_low(sampler, cfg: RunConfig, variant: str = "multi",
              rng: np.random.Generator | None = None, progress=None):
    """Train the (control, stop-signal) head pair on one dataset."""
    # separate draw streams so one head's step budget never shifts the
    # other head's batches
    rng_a = rng or np.random.default_rng([cfg.train.seed, 21, _VARIANT[variant]])
    rng_e = rng or np.random.default_rng([cfg.train.seed, 24, _VARIANT[variant]])
    action = LowPolicy("action", variant, cfg.model,
                       init_rng(cfg, "low_action", variant))
    end = LowPolicy("end", variant, cfg.model, init_rng(cfg, "low_end", variant))
    # the shared-trunk stop head fits all four signals in one recurrent
    # core and separates them slower than dedicated heads do
    end_steps = cfg.train.end_steps * 2 if variant == "ga" else None
    curves = {"action": train_low_head(action, sampler, cfg, rng_a,
                                       progress=progress),
              "end": train_low_head(end, sampler, cfg, rng_e, steps=end_steps,
                                    progress=progress)}
    return action, end, curves


def train_high(sampler, cfg: RunConfig, variant: str = "hih",
               rng: np.random.Generator | None = None,
               use_misleading: bool | None = None, steps: int | None = None,
               progress=None):
    """Fit a sub-task selector on decision sequences (CE per boundary)."""
    tcfg = cfg.train
    if use_misleading is None:
        use_misleading = tcfg.use_misleading
    if steps is None:
        steps = tcfg.high_steps
    rng = rng or np.random.default_rng([tcfg.seed, 22, _VARIANT[variant]])
    policy = HighPolicy(len(sampler.vocab), variant, cfg.model,
                        init_rng(cfg, "high", variant))

    def step_fn(it):
        n_turns = 1 if it % 2 == 0 else 2
        ids, mask, grids, prev, targets = sampler.high_batch(
            rng, n_turns, misleading=use_misleading)
        h = policy.init_hidden(targets.shape[0])
        terms = []
        for k in range(targets.shape[1]):
            g = None if policy.variant == "h0" else grids[:, k]
            logits, h = policy.forward(ids, mask, g, prev[:, k], h)
            terms.append(ce_loss(logits, targets[:, k]))
        return _mean_of(terms)

    curve = _fit(policy, step_fn, steps, tcfg.eval_every,
                 f"high_{variant}", tcfg.learning_rate, progress)
    return policy, curve


def train_flat(sampler, cfg: RunConfig, variant: str = "plain",
               rng: np.random.Generator | None = None,
               steps: int | None = None, progress=None):
    """Fit a single-level baseline on dense control windows."""
    tcfg = cfg.train
    if steps is None:
        steps = tcfg.flat_steps
    rng = rng or np.random.default_rng([tcfg.seed, 23, _VARIANT[variant]])
    policy = FlatPolicy(len(sampler.vocab), variant, cfg.model,
                        init_rng(cfg, "flat", variant))

    def step_fn(it):
        ids, mask, grids, prev_act, targets = sampler.flat_batch(rng)
        ctx = policy.encode(ids, mask)
        h = policy.init_hidden(targets.shape[0])
        terms = []
        for t in range(grids.shape[1]):
            out, h = policy.step(ctx, grids[:, t], h, prev_act[:, t])
            terms.append(l1_loss(out, targets[:, t]))
        return _mean_of(terms)

    curve = _fit(policy, step_fn, steps, tcfg.eval_every,
                 f"flat_{variant}", tcfg.learning_rate, progress)
    return policy, curve


def init_bundle(cfg: RunConfig, vocab, high_variant: str = "hih",
                low_variant: str = "multi") -> PolicyBundle:
    """Freshly initialized (untrained) hierarchical agent."""
    return PolicyBundle(
        HighPolicy(len(vocab), high_variant, cfg.model,
                   init_rng(cfg, "high", high_variant)),
        LowPolicy("action", low_variant, cfg.model,
                  init_rng(cfg, "low_action", low_variant)),
        LowPolicy("end", low_variant, cfg.model,
                  init_rng(cfg, "low_end", low_variant)),
        vocab)
