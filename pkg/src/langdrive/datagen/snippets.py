"""Structural carving of collected trajectories.

A snippet is a maximal run of one sub-task label plus margin context on both
sides. Snippets drive everything downstream: stop-signal labels (the last
frames of each completed core), and segments -- lanefollow/turn alternations
that become high-level training sequences with jittered decision ticks.
"""

from __future__ import annotations

import numpy as np

from ..subtasks import SUBTASKS


def extract_snippets(subtasks: np.ndarray, margin: int) -> list[dict]:
    """Maximal constant-label runs with context windows, trajectory-local ticks.

    The run touching the trajectory's last frame is flagged final: its core
    was cut by the tick budget, not by a real sub-task boundary.
    """
    T = len(subtasks)
    out = []
    a = 0
    for b in range(1, T + 1):
        if b < T and subtasks[b] == subtasks[a]:
            continue
        out.append({"subtask": SUBTASKS[int(subtasks[a])],
                    "core": [a, b],
                    "ctx": [max(0, a - margin), min(T, b + margin)],
                    "final": b == T})
        a = b
    return out


def end_labels(n: int, snips: list[dict], span: int, min_core: int) -> np.ndarray:
    """Per-frame stop-signal targets: 1 on the last `span` core frames of each
    completed (non-final, long-enough) snippet, 0 elsewhere."""
    end = np.zeros(n, np.uint8)
    for sn in snips:
        a, b = sn["core"]
        if sn["final"] or b - a < min_core:
            continue
        end[max(a, b - span):b] = 1
    return end


def _decision_points(members: list[dict], window: int) -> list[dict]:
    """Jitter ranges [lo, hi] (inclusive) and targets for one segment.

    One decision per member plus the closing finish; boundary decisions may
    land up to `window` ticks on either side of the transition.
    """
    first = members[0]
    ds = [{"lo": first["core"][0],
           "hi": min(first["core"][0] + window, first["core"][1] - 1),
           "target": first["subtask"]}]
    for prev, cur in zip(members, members[1:]):
        b = cur["core"][0]
        ds.append({"lo": max(b - window, prev["core"][0]),
                   "hi": min(b + window, cur["core"][1] - 1),
                   "target": cur["subtask"]})
    last = members[-1]
    fin = last["core"][1] - 1
    ds.append({"lo": max(fin - window, last["core"][0]),
               "hi": fin,
               "target": "finish"})
    return ds


def enumerate_segments(snips: list[dict], min_core: int,
                       window: int) -> list[dict]:
    """Lanefollow/turn alternations of one or two junctions.

    Members must have full cores and the closing lanefollow must have ended
    naturally (a truncated tail has no real completion to learn from).
    """

    def usable(i: int) -> bool:
        sn = snips[i]
        return sn["core"][1] - sn["core"][0] >= min_core

    def lf(i: int) -> bool:
        return snips[i]["subtask"] == "lanefollow"

    segs = []
    for n_turns in (1, 2):
        size = 2 * n_turns + 1
        for i in range(len(snips) - size + 1):
            idxs = list(range(i, i + size))
            if not all(usable(j) for j in idxs):
                continue
            if snips[idxs[-1]]["final"]:
                continue
            if not all(lf(j) == (k % 2 == 0) for k, j in enumerate(idxs)):
                continue
            members = [snips[j] for j in idxs]
            segs.append({"snips": idxs,
                         "turns": [m["subtask"] for m in members[1::2]],
                         "bounds": [members[0]["ctx"][0], members[-1]["core"][1]],
                         "decisions": _decision_points(members, window),
                         "mislead": [], "mislead_straight": False})
    return segs


def tag_misleading(segs: list[dict], snips: list[dict],
                   events: list[dict]) -> None:
    """Mark segments replayable under a deceptive instruction.

    `mislead` lists turn directions absent at the segment's first junction
    while the expert drove straight through it: commanding one of them is a
    lie and the correct reaction is the straight crossing actually driven.
    `mislead_straight` flags one-junction segments where straight itself is
    impossible: commanding straight there should make the agent brake to a
    stop, so the recorded turn is replayed only up to the junction approach.
    """
    by_tick = {ev["tick"]: ev for ev in events}
    for seg in segs:
        tsnip = snips[seg["snips"][1]]
        ev = by_tick.get(tsnip["core"][0])
        if ev is None:
            continue
        if seg["turns"][0] == "straight":
            seg["mislead"] = [d for d in ev["missing"] if d != "straight"]
        elif len(seg["turns"]) == 1 and "straight" in ev["missing"]:
            seg["mislead_straight"] = True
