"""Variant comparison: train every agent on shared data, score every cell.

Six agents per seed share one dataset: three instruction-reading selector
variants over the per-sub-task low-level pair, the same selector over the
gated-attention low-level pair, and two flat baselines. Each is scored on
four language types in both towns. The deceptive-instruction suite retrains
the selectors with lies included and reuses the trained low-level heads.
"""

from __future__ import annotations

import os
from dataclasses import replace

from ..config import RunConfig, config_hash
from ..datagen import TrainingSampler, build_store, save_store
from ..language import TemplateBank, build_vocabulary
from ..policies.bundle import PolicyBundle, save_bundle, save_flat
from .evaluate import (EVAL_TYPES, EvalReport, FlatAgent, eval_cell,
                       misleading_eval, render_table)
from .train import train_flat, train_high, train_low

AGENT_NAMES = ("h0", "hi", "hih", "hihg", "flat", "flat_history")
HIGH_OF = {"h0": "h0", "hi": "hi", "hih": "hih", "hihg": "hih"}
LOW_OF = {"h0": "multi", "hi": "multi", "hih": "multi", "hihg": "ga"}


def seeded(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, train=replace(cfg.train, seed=seed))


def train_suite(cfg: RunConfig, town: str = "A", store=None, progress=None):
    """All six agents trained on one dataset; returns them plus the pieces."""
    if store is None:
        store = build_store(cfg, town)
    bank = TemplateBank()
    vocab = build_vocabulary(bank)
    sampler = TrainingSampler(store, bank, vocab, cfg)
    lows, curves = {}, {}
    for lv in ("multi", "ga"):
        act, end, c = train_low(sampler, cfg, lv, progress=progress)
        lows[lv] = (act, end)
        curves[f"low_{lv}"] = c
    highs = {}
    for hv in ("h0", "hi", "hih"):
        highs[hv], curves[f"high_{hv}"] = train_high(sampler, cfg, hv,
                                                     progress=progress)
    flats = {}
    for fv in ("plain", "history"):
        flats[fv], curves[f"flat_{fv}"] = train_flat(sampler, cfg, fv,
                                                     progress=progress)
    agents = {}
    for name in AGENT_NAMES:
        if name.startswith("flat"):
            agents[name] = FlatAgent(
                flats["history" if name == "flat_history" else "plain"], vocab)
        else:
            act, end = lows[LOW_OF[name]]
            agents[name] = PolicyBundle(highs[HIGH_OF[name]], act, end, vocab)
    return {"agents": agents, "lows": lows, "highs": highs, "flats": flats,
            "sampler": sampler, "store": store, "bank": bank, "vocab": vocab,
            "curves": curves}


def save_suite(out: str, suite: dict, cfg: RunConfig):
    os.makedirs(out, exist_ok=True)
    save_store(os.path.join(out, "data"), suite["store"])
    meta = {"config_hash": config_hash(cfg)}
    for name, agent in suite["agents"].items():
        path = os.path.join(out, name)
        if isinstance(agent, FlatAgent):
            save_flat(path, agent.policy, agent.vocab, meta)
        else:
            save_bundle(path, agent, meta)


def ablation_matrix(cfg: RunConfig | None = None, seeds=None,
                    towns=("A", "B"), types=EVAL_TYPES,
                    episodes: int | None = None, out: str | None = None,
                    progress=None, suites_out: dict | None = None) -> dict:
    """The full (agent x language type x town) success grid, per seed.

    `suites_out`, when given, receives the trained suite of each seed so a
    caller can run follow-up studies without retraining.
    """
    cfg = cfg or RunConfig()
    seeds = list(seeds) if seeds is not None else [cfg.train.seed]
    doc = {"config_hash": config_hash(cfg), "seeds": seeds,
           "towns": list(towns), "types": list(types), "cells": {}}
    for seed in seeds:
        cfg_s = seeded(cfg, seed)
        if episodes is not None:
            cfg_s = replace(cfg_s, eval=replace(cfg_s.eval,
                                                episodes_per_cell=episodes))
        suite = train_suite(cfg_s, "A", progress=progress)
        if suites_out is not None:
            suites_out[seed] = suite
        if out is not None:
            save_suite(os.path.join(out, f"seed{seed}"), suite, cfg_s)
        nets = {}
        for name, agent in suite["agents"].items():
            per_seed = doc["cells"].setdefault(name, {})
            grid = per_seed.setdefault(str(seed), {})
            for town in towns:
                if town not in nets:
                    from ..world.network import build_town
                    nets[town] = build_town(town, cfg_s.train.seed, cfg_s.world)
                for ltype in types:
                    cell = eval_cell(agent, nets[town], town, ltype,
                                     cfg_s.eval.episodes_per_cell, seed,
                                     cfg_s, suite["bank"], suite["vocab"])
                    grid[f"{town}/{ltype}"] = cell
                    if progress is not None:
                        progress(f"{name} s{seed}", f"{town}/{ltype}",
                                 cell["rate"], None)
    return doc


def ablation_table(doc: dict) -> str:
    rows = [f"{name} s{seed}" for name in doc["cells"]
            for seed in doc["cells"][name]]

    def cell_of(row, town, ltype):
        name, seed = row.rsplit(" s", 1)
        return doc["cells"][name][seed].get(f"{town}/{ltype}")

    return render_table(rows, doc["towns"], doc["types"], cell_of)


def misleading_suite(cfg: RunConfig, suite: dict, town: str = "A",
                     episodes: int | None = None, seed: int | None = None,
                     progress=None) -> dict:
    """Retrain the selectors with deceptive examples; score the lie suite."""
    if seed is None:
        seed = cfg.train.seed
    vocab, bank = suite["vocab"], suite["bank"]
    act, end = suite["lows"]["multi"]
    doc = {"config_hash": config_hash(cfg), "town": town, "cells": {}}
    for hv in ("h0", "hi", "hih"):
        high, _curve = train_high(suite["sampler"], cfg, hv,
                                  use_misleading=True, progress=progress)
        bundle = PolicyBundle(high, act, end, vocab)
        rep = misleading_eval(bundle, town, episodes, seed, cfg,
                              label=f"{hv}+lies", bank=bank, vocab=vocab)
        doc["cells"][hv] = rep.cells[f"{town}/mislead"]
        if progress is not None:
            progress(f"{hv}+lies", "mislead", doc["cells"][hv]["rate"], None)
    return doc
