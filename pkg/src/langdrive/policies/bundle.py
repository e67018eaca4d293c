"""Saving and loading trained agents.

A hierarchical agent is three weight files plus one manifest carrying the
variants, the model configuration and the vocabulary (so a bundle is
self-contained). Flat baselines use the same manifest with a single file.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

from ..config import ModelConfig
from ..language.vocab import Vocabulary
from ..neuralcore.params import load_params, save_params
from .flat import FlatPolicy
from .high import HighPolicy
from .low import LowPolicy

MANIFEST = "manifest.json"
FORMAT_VERSION = 1


def load_weights_into(policy, path):
    """Copy a saved ParamSet into a freshly built policy, name for name."""
    loaded = load_params(path)
    have = set(policy.params.names())
    got = set(loaded.names())
    if have != got:
        missing = sorted(have - got)
        extra = sorted(got - have)
        raise ValueError(f"weight mismatch for {path}: missing {missing}, "
                         f"unexpected {extra}")
    for name, tensor in loaded.items():
        mine = policy.params[name]
        if mine.data.shape != tensor.data.shape:
            raise ValueError(f"shape mismatch for {name}: "
                             f"{mine.data.shape} vs {tensor.data.shape}")
        mine.data[...] = tensor.data


def _model_cfg_from(raw: dict) -> ModelConfig:
    kwargs = {}
    for f in dataclasses.fields(ModelConfig):
        if f.name in raw:
            v = raw[f.name]
            kwargs[f.name] = tuple(v) if isinstance(v, list) else v
    return ModelConfig(**kwargs)


@dataclass
class PolicyBundle:
    high: HighPolicy
    low_action: LowPolicy
    low_end: LowPolicy
    vocab: Vocabulary

    @property
    def cfg(self) -> ModelConfig:
        return self.high.cfg


def _manifest(kind: str, vocab: Vocabulary, cfg: ModelConfig, fields: dict,
              meta: dict | None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "model": dataclasses.asdict(cfg),
        "vocab": vocab.words,
        **fields,
    }
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=1, sort_keys=True)


def _read_manifest(dirpath, kind: str) -> dict:
    with open(os.path.join(dirpath, MANIFEST)) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format {doc.get('format_version')!r}")
    if doc.get("kind") != kind:
        raise ValueError(f"expected a {kind} bundle, found {doc.get('kind')!r}")
    return doc


def save_bundle(dirpath, bundle: PolicyBundle, meta: dict | None = None):
    os.makedirs(dirpath, exist_ok=True)
    fields = {
        "high_variant": bundle.high.variant,
        "low_variant": bundle.low_action.variant,
    }
    with open(os.path.join(dirpath, MANIFEST), "w") as f:
        f.write(_manifest("hierarchical", bundle.vocab, bundle.cfg, fields, meta))
    save_params(os.path.join(dirpath, "high.weights"), bundle.high.params)
    save_params(os.path.join(dirpath, "low_action.weights"),
                bundle.low_action.params)
    save_params(os.path.join(dirpath, "low_end.weights"), bundle.low_end.params)


def save_partial(dirpath, vocab: Vocabulary, cfg: ModelConfig, *,
                 high: HighPolicy | None = None,
                 low_action: LowPolicy | None = None,
                 low_end: LowPolicy | None = None,
                 meta: dict | None = None):
    """Write one or two levels into a bundle directory, merging the manifest.

    Training the levels separately (the CLI does) fills the directory in any
    order; it becomes loadable once all three weight files exist.
    """
    os.makedirs(dirpath, exist_ok=True)
    path = os.path.join(dirpath, MANIFEST)
    if os.path.exists(path):
        with open(path) as f:
            doc = json.load(f)
        if doc.get("kind") != "hierarchical":
            raise ValueError(f"{dirpath} holds a {doc.get('kind')!r} agent")
    else:
        doc = {"format_version": FORMAT_VERSION, "kind": "hierarchical",
               "model": dataclasses.asdict(cfg), "vocab": vocab.words}
    if meta:
        doc.setdefault("meta", {}).update(meta)
    if high is not None:
        doc["high_variant"] = high.variant
        save_params(os.path.join(dirpath, "high.weights"), high.params)
    if low_action is not None:
        doc["low_variant"] = low_action.variant
        save_params(os.path.join(dirpath, "low_action.weights"),
                    low_action.params)
    if low_end is not None:
        save_params(os.path.join(dirpath, "low_end.weights"), low_end.params)
    with open(path, "w") as f:
        f.write(json.dumps(doc, indent=1, sort_keys=True))


def load_bundle(dirpath) -> PolicyBundle:
    doc = _read_manifest(dirpath, "hierarchical")
    missing = [k for k in ("high_variant", "low_variant") if k not in doc]
    if missing:
        raise FileNotFoundError(
            f"bundle at {dirpath} is incomplete: no {missing[0].split('_')[0]}"
            " level has been trained into it yet")
    vocab = Vocabulary(doc["vocab"])
    cfg = _model_cfg_from(doc["model"])
    high = HighPolicy(len(vocab), doc["high_variant"], cfg)
    low_action = LowPolicy("action", doc["low_variant"], cfg)
    low_end = LowPolicy("end", doc["low_variant"], cfg)
    load_weights_into(high, os.path.join(dirpath, "high.weights"))
    load_weights_into(low_action, os.path.join(dirpath, "low_action.weights"))
    load_weights_into(low_end, os.path.join(dirpath, "low_end.weights"))
    return PolicyBundle(high, low_action, low_end, vocab)


def save_flat(dirpath, policy: FlatPolicy, vocab: Vocabulary,
              meta: dict | None = None):
    os.makedirs(dirpath, exist_ok=True)
    fields = {"flat_variant": policy.variant}
    with open(os.path.join(dirpath, MANIFEST), "w") as f:
        f.write(_manifest("flat", vocab, policy.cfg, fields, meta))
    save_params(os.path.join(dirpath, "flat.weights"), policy.params)


def load_flat(dirpath) -> tuple[FlatPolicy, Vocabulary]:
    doc = _read_manifest(dirpath, "flat")
    vocab = Vocabulary(doc["vocab"])
    policy = FlatPolicy(len(vocab), doc["flat_variant"], _model_cfg_from(doc["model"]))
    load_weights_into(policy, os.path.join(dirpath, "flat.weights"))
    return policy, vocab
