"""Session-scoped trained artifacts shared by the acceptance gate.

Everything here is lazy: fast test files never trigger training. The first
test that asks for an artifact pays for it once per session. All builders
are deterministic in the run configuration and seeds.
"""

import time

import pytest

from langdrive.config import RunConfig
from langdrive.datagen import TrainingSampler, build_store
from langdrive.harness import (ablation_matrix, eval_cell, misleading_suite,
                               seeded, train_high, train_low)
from langdrive.language import TemplateBank, build_vocabulary
from langdrive.policies.bundle import PolicyBundle
from langdrive.world.network import build_town

ABLATION_SEEDS = (0, 1)
EPISODES_PER_CELL = 40


@pytest.fixture(scope="session")
def run_cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def lang():
    bank = TemplateBank()
    return bank, build_vocabulary(bank)


@pytest.fixture(scope="session")
def towns(run_cfg):
    return {t: build_town(t, run_cfg.train.seed, run_cfg.world)
            for t in ("A", "B")}


@pytest.fixture(scope="session")
def hih_artifacts(run_cfg, lang, towns):
    """One full single-model pipeline, timed end to end: demonstrations,
    low-level pair, selector, and success cells on both towns."""
    bank, vocab = lang
    t0 = time.monotonic()
    store = build_store(run_cfg, "A")
    sampler = TrainingSampler(store, bank, vocab, run_cfg)
    action, end, low_curves = train_low(sampler, run_cfg, "multi")
    high, high_curve = train_high(sampler, run_cfg, "hih")
    bundle = PolicyBundle(high, action, end, vocab)
    cells = {}
    for town, ltype in (("A", "single"), ("A", "double"), ("A", "ordinal"),
                        ("A", "all"), ("B", "all")):
        cells[f"{town}/{ltype}"] = eval_cell(
            bundle, towns[town], town, ltype, EPISODES_PER_CELL,
            run_cfg.train.seed, run_cfg, bank, vocab)
    return {"bundle": bundle, "store": store, "sampler": sampler,
            "cells": cells, "low_curves": low_curves,
            "high_curve": high_curve, "seconds": time.monotonic() - t0}


@pytest.fixture(scope="session")
def matrix_artifacts(run_cfg):
    """The ablation grid over all agents, both towns, all language types."""
    suites = {}
    t0 = time.monotonic()
    doc = ablation_matrix(run_cfg, seeds=ABLATION_SEEDS,
                          episodes=EPISODES_PER_CELL, suites_out=suites)
    return {"doc": doc, "suites": suites, "seconds": time.monotonic() - t0}


@pytest.fixture(scope="session")
def mislead_artifacts(run_cfg, matrix_artifacts):
    """Selectors retrained on deceptive instructions, scored on the lie suite."""
    seed = ABLATION_SEEDS[0]
    t0 = time.monotonic()
    doc = misleading_suite(seeded(run_cfg, seed),
                           matrix_artifacts["suites"][seed],
                           episodes=EPISODES_PER_CELL)
    return {"doc": doc, "seconds": time.monotonic() - t0}
