"""Command-line surface.

Subcommands: collect (build a dataset), train (one level into a bundle
directory), eval (score a bundle on one cell), ablate (the full variant
matrix from a config file), mislead-eval (deceptive-instruction suite),
drive (websocket serving). Reports are JSON files plus an aligned table on
stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys


from ..config import RunConfig, config_hash
from ..datagen import TrainingSampler, build_store, load_store, save_store
from ..language import TemplateBank, Vocabulary, build_vocabulary
from ..policies.bundle import load_bundle, load_flat, save_partial
from .ablate import ablation_matrix, ablation_table, misleading_suite
from .evaluate import EVAL_TYPES, FlatAgent, evaluate, misleading_eval
from .train import train_high, train_low


def _config_from(path: str | None, seed: int | None = None) -> RunConfig:
    cfg = RunConfig()
    if path:
        with open(path) as f:
            cfg = RunConfig.from_dict(json.load(f))
    if seed is not None:
        cfg = dataclasses.replace(
            cfg, train=dataclasses.replace(cfg.train, seed=seed))
    return cfg


def _load_agent(path: str):
    with open(os.path.join(path, "manifest.json")) as f:
        kind = json.load(f).get("kind")
    if kind == "flat":
        policy, vocab = load_flat(path)
        return FlatAgent(policy, vocab)
    return load_bundle(path)


def _emit_report(report, path: str | None):
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as f:
            f.write(report.to_json())
    print(report.table())


def _progress(tag, step, total, value):
    if total is None:
        print(f"  {tag} {step}: {value}", flush=True)
    else:
        print(f"  {tag} {step}/{total} loss {value:.4f}", flush=True)


def cmd_collect(args) -> int:
    cfg = _config_from(args.config, args.seed)
    data = cfg.data
    if args.ticks:
        data = dataclasses.replace(data, ticks_per_trajectory=args.ticks)
    if args.trajectories:
        data = dataclasses.replace(data, trajectories=args.trajectories)
    cfg = dataclasses.replace(cfg, data=data)
    store = build_store(cfg, args.town)
    save_store(args.out, store)
    print(f"wrote {store.n_frames} frames over {store.n_trajectories} "
          f"trajectories to {args.out} (config {config_hash(cfg)})")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from(args.config, args.seed)
    store = load_store(args.data)
    bank = TemplateBank()
    vocab = build_vocabulary(bank)
    sampler = TrainingSampler(store, bank, vocab, cfg)
    meta = {"config_hash": config_hash(cfg), "data": args.data}
    if args.level == "low":
        variant = args.variant or "multi"
        action, end, curves = train_low(sampler, cfg, variant,
                                        progress=_progress)
        save_partial(args.out, vocab, cfg.model, low_action=action,
                     low_end=end, meta=meta)
        print(f"low pair ({variant}) -> {args.out}  "
              f"action loss {curves['action'].final_loss:.4f}  "
              f"end loss {curves['end'].final_loss:.4f}")
    else:
        variant = args.variant or "hih"
        high, curve = train_high(sampler, cfg, variant,
                                 use_misleading=args.misleading,
                                 progress=_progress)
        save_partial(args.out, vocab, cfg.model, high=high, meta=meta)
        print(f"high ({variant}) -> {args.out}  loss {curve.final_loss:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from(args.config, args.seed)
    agent = _load_agent(args.bundle)
    report = evaluate(agent, args.town, args.language_type,
                      n_episodes=args.episodes, seed=args.seed, cfg=cfg,
                      label=os.path.basename(os.path.normpath(args.bundle)))
    _emit_report(report, args.report)
    return 0


def cmd_ablate(args) -> int:
    with open(args.config) as f:
        spec = json.load(f)
    cfg = RunConfig.from_dict(spec.get("config", {}))
    doc = ablation_matrix(cfg, seeds=spec.get("seeds"),
                          towns=tuple(spec.get("towns", ("A", "B"))),
                          types=tuple(spec.get("types", EVAL_TYPES)),
                          episodes=spec.get("episodes"),
                          out=spec.get("out"), progress=_progress)
    report_path = spec.get("report")
    if report_path:
        os.makedirs(os.path.dirname(report_path) or ".", exist_ok=True)
        with open(report_path, "w") as f:
            f.write(json.dumps(doc, indent=1, sort_keys=True))
    print(ablation_table(doc))
    return 0


def cmd_mislead_eval(args) -> int:
    cfg = _config_from(args.config, args.seed)
    agent = _load_agent(args.bundle)
    report = misleading_eval(agent, args.town, n_episodes=args.episodes,
                             seed=args.seed, cfg=cfg,
                             label=os.path.basename(
                                 os.path.normpath(args.bundle)))
    _emit_report(report, args.report)
    cell = next(iter(report.cells.values()))
    print(f"offroad events: {cell['offroad_events']}  "
          f"stop episodes: {cell['stop_episodes']}  "
          f"top stop speed: {cell['stop_top_final_speed']}")
    return 0


def cmd_drive(args) -> int:
    from ..server import serve
    cfg = _config_from(args.config, args.seed)
    bundle = load_bundle(args.bundle)
    serve(bundle, args.town, args.port, cfg=cfg,
          real_time_factor=args.real_time_factor, ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="langdrive")
    p.add_argument("--config", help="run-config JSON file", default=None)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("collect", help="record an expert driving dataset")
    c.add_argument("--town", default="A", choices=("A", "B"))
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--ticks", type=int, default=None,
                   help="ticks per trajectory")
    c.add_argument("--trajectories", type=int, default=None)
    c.add_argument("--out", required=True)
    c.set_defaults(fn=cmd_collect)

    t = sub.add_parser("train", help="train one policy level into a bundle")
    t.add_argument("--level", required=True, choices=("low", "high"))
    t.add_argument("--variant", default=None,
                   help="low: multi|ga; high: h0|hi|hih")
    t.add_argument("--data", required=True, help="dataset directory")
    t.add_argument("--out", required=True, help="bundle directory")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--misleading", action="store_true",
                   help="include deceptive instruction examples (high only)")
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="score a bundle on one cell")
    e.add_argument("--bundle", required=True)
    e.add_argument("--town", default="A", choices=("A", "B"))
    e.add_argument("--language-type", default="single", choices=EVAL_TYPES)
    e.add_argument("--episodes", type=int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--report", default=None, help="write JSON here")
    e.set_defaults(fn=cmd_eval)

    a = sub.add_parser("ablate", help="train and score every variant")
    a.add_argument("--config", required=True,
                   help="JSON: {config, seeds, towns, types, episodes, out, report}")
    a.set_defaults(fn=cmd_ablate)

    m = sub.add_parser("mislead-eval", help="deceptive-instruction suite")
    m.add_argument("--bundle", required=True)
    m.add_argument("--town", default="A", choices=("A", "B"))
    m.add_argument("--episodes", type=int, default=None)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--report", default=None)
    m.set_defaults(fn=cmd_mislead_eval)

    d = sub.add_parser("drive", help="serve live driving over a websocket")
    d.add_argument("--bundle", required=True)
    d.add_argument("--town", default="A", choices=("A", "B"))
    d.add_argument("--port", type=int, default=8700)
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--real-time-factor", type=float, default=1.0)
    d.add_argument("--ui", default=None,
                   help="serve a built web console from this directory")
    d.set_defaults(fn=cmd_drive)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
