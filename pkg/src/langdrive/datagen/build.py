"""End-to-end dataset assembly for one town.

Collects roaming and braking trajectories, concatenates their frames,
carves snippets and segments, writes stop-signal labels, and wraps it all
in a FrameStore whose index carries every structural annotation the
training samplers need.
"""

from __future__ import annotations

import numpy as np

from ..config import RunConfig, config_hash
from ..world import build_town
from .collect import collect_roam, collect_stop, stop_approaches
from .frames import FrameStore
from .snippets import (end_labels, enumerate_segments, extract_snippets,
                       tag_misleading)


def build_store(cfg: RunConfig, town: str = "A", progress=None,
                stop_edges: list | None = None) -> FrameStore:
    """Collect and annotate the full demonstration set for `town`.

    Deterministic in (cfg, town): the road network, spawn draws and expert
    turn choices all come from one seeded generator. `stop_edges` restricts
    braking runs to the given approach edges (default: every deficient one).
    """
    dcfg = cfg.data
    net = build_town(town, cfg.train.seed, cfg.world)
    rng = np.random.default_rng(cfg.train.seed)

    chunks = []          # (grids, actions, subtasks, end, info)
    for k in range(dcfg.trajectories):
        g, a, s, info = collect_roam(net, rng, dcfg.ticks_per_trajectory,
                                     cfg.world, cfg.expert)
        snips = extract_snippets(s, dcfg.margin_ticks)
        e = end_labels(len(s), snips, dcfg.end_span, dcfg.min_snippet_core)
        segs = enumerate_segments(snips, dcfg.min_snippet_core,
                                  dcfg.boundary_window)
        tag_misleading(segs, snips, info["events"])
        info["snippets"] = snips
        info["segments"] = segs
        chunks.append((g, a, s, e, info))
        if progress:
            progress(f"roam {k + 1}/{dcfg.trajectories}: {len(s)} frames, "
                     f"{len(segs)} segments")

    approaches = stop_approaches(net) if stop_edges is None else list(stop_edges)
    for j, edge_idx in enumerate(
            a for a in approaches for _ in range(dcfg.stop_runs_per_approach)):
        g, a, s, info = collect_stop(net, edge_idx, rng, cfg.world, cfg.expert,
                                     dcfg.stop_hold_ticks)
        e = np.zeros(len(s), np.uint8)
        chunks.append((g, a, s, e, info))
        if progress and (j + 1) % 40 == 0:
            progress(f"stop runs {j + 1}")

    offsets = np.zeros(len(chunks) + 1, np.int64)
    for i, ch in enumerate(chunks):
        offsets[i + 1] = offsets[i] + len(ch[2])
    meta = {"format_version": 1,
            "town": town,
            "seed": cfg.train.seed,
            "config_hash": config_hash(cfg),
            "trajectories": [ch[4] for ch in chunks]}
    return FrameStore(np.concatenate([ch[0] for ch in chunks]),
                      np.concatenate([ch[1] for ch in chunks]),
                      np.concatenate([ch[2] for ch in chunks]),
                      np.concatenate([ch[3] for ch in chunks]),
                      offsets, meta)
