"""Command-line entry points: generate, train, eval, bench, stream."""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from mmhar.config import RunConfig, load_config
from mmhar.core import ActionLabel, InputModality, all_modalities, resolve_modalities
from mmhar.errors import ConfigError
from mmhar.harness import Checkpoint, benchmark_latency, evaluate, train
from mmhar.harness.reporting import write_confusion_csv, write_history_csv, write_rows_csv, write_summary
from mmhar.models import build_model
from mmhar.pipeline import segment_all, split_dataset, standardize
from mmhar.pipeline.io import load_dataset, save_dataset, save_windows
from mmhar.stream import run_online_eval
from mmhar.synthgen import Hand, gen_continuous_sequence, gen_segmented_dataset

SEGMENTED = "segmented"
CONTINUOUS = "continuous"
_ORDER = {m.name: i for i, m in enumerate(all_modalities())}


def _ordered(mods: Sequence[InputModality]) -> list[InputModality]:
    seen = {m.name: m for m in mods}
    return sorted(seen.values(), key=lambda m: _ORDER[m.name])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _checkpoint_path(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.run_dir) / "checkpoints" / f"{name}.pt"


def _load_checkpoint(cfg: RunConfig, name: str) -> Checkpoint:
    path = _checkpoint_path(cfg, name)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint for {name} not found at {path}; run 'train' first")
    return Checkpoint.load(path)


def _segmented_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.dataset_dir) / SEGMENTED
    if not path.is_dir():
        raise FileNotFoundError(f"segmented dataset not found at {path}; run 'generate' first")
    return path


def _splits(cfg: RunConfig, mods: Sequence[InputModality]):
    streams = tuple(s for s in ("imu", "top", "bottom") if any(s in m.streams for m in mods))
    recs = load_dataset(_segmented_dir(cfg))
    if not recs:
        raise FileNotFoundError(f"no recordings under {_segmented_dir(cfg)}")
    ws = segment_all(recs, image_size=cfg.image_size, ranges=cfg.imu_ranges(), streams=streams)
    del recs
    splits = split_dataset(ws, cfg.train.fractions, seed=cfg.seed)
    del ws
    return standardize(splits, cfg.train.stats_source)


def cmd_generate(cfg: RunConfig) -> dict:
    root = Path(cfg.dataset_dir)
    params = cfg.gen_params()
    recs = gen_segmented_dataset(cfg.gen.participants, params)
    save_dataset(recs, root / SEGMENTED)
    order = list(ActionLabel)
    seqs = [
        gen_continuous_sequence(order, cfg.gen.action_duration, cfg.gen.pause_duration, params,
                                participant=k % cfg.gen.participants, hand=Hand.RIGHT, sequence=k)
        for k in range(cfg.gen.continuous_sequences)
    ]
    save_dataset(seqs, root / CONTINUOUS)
    counts = {"segmented": len(recs), "continuous": len(seqs)}
    if cfg.gen.write_windows:
        ws = segment_all(recs, image_size=cfg.image_size, ranges=cfg.imu_ranges())
        save_windows(ws, root / "windows")
        counts["windows"] = len(ws)
    cfg.dump(root / "config.generate.yaml")
    print(f"wrote {counts['segmented']} segmented and {counts['continuous']} continuous recordings to {root}")
    if "windows" in counts:
        print(f"wrote {counts['windows']} windows to {root / 'windows'}")
    return counts


def cmd_train(cfg: RunConfig) -> dict:
    run = Path(cfg.run_dir)
    mods = _ordered(cfg.modalities())
    (train_ws, val_ws, test_ws), stats = _splits(cfg, mods)
    cfg.dump(run / "config.train.yaml")
    spec, presets = cfg.train_spec(), cfg.presets()
    rows, summary = [], {"seed": cfg.seed, "preset": cfg.preset, "models": {},
                         "windows": {"train": len(train_ws), "val": len(val_ws), "test": len(test_ws)},
                         "image_stats": {k: list(stats.applied(k)) for k in ("train", "val", "test")}
                         if stats.mean else None}
    for mod in mods:
        res = train(mod, (train_ws, val_ws), spec, presets, cfg.imu_ranges())
        path = _checkpoint_path(cfg, mod.name)
        res.checkpoint.save(path)
        write_history_csv(res.history, _mkdir(run / "histories") / f"{mod.name}.csv")
        ev = evaluate(res.checkpoint, test_ws)
        write_confusion_csv(ev.confusion, _mkdir(run / "confusion") / f"{mod.name}.csv")
        rows.append({"modality": mod.name, "macro_f1": ev.metrics.macro_f1, "accuracy": ev.metrics.accuracy,
                     "epochs": len(res.history.epochs), "best_epoch": res.history.best_epoch})
        summary["models"][mod.name] = {
            **ev.metrics.summary(),
            "per_class_f1": [float(v) for v in ev.metrics.f1],
            "epochs": len(res.history.epochs),
            "best_epoch": res.history.best_epoch,
            "best_val_f1": max(res.history.val_f1),
            "checkpoint_sha256": _sha256(path),
        }
        print(f"{mod.name:10s} test macro F1 {ev.metrics.macro_f1:.4f}  ({len(res.history.epochs)} epochs)")
    write_rows_csv(rows, run / "metrics.csv")
    write_summary(summary, run / "summary.json")
    return summary


def cmd_eval(cfg: RunConfig) -> dict:
    run = Path(cfg.run_dir)
    mods = _ordered(cfg.modalities())
    ckpts = [_load_checkpoint(cfg, m.name) for m in mods]
    (_, _, test_ws), _ = _splits(cfg, mods)
    cfg.dump(run / "config.eval.yaml")
    rows, summary = [], {"seed": cfg.seed, "split": "test", "models": {}}
    for mod, ck in zip(mods, ckpts):
        ev = evaluate(ck, test_ws)
        write_confusion_csv(ev.confusion, _mkdir(run / "confusion") / f"{mod.name}.csv")
        rows.append({"modality": mod.name, "macro_f1": ev.metrics.macro_f1, "accuracy": ev.metrics.accuracy})
        summary["models"][mod.name] = ev.metrics.summary()
        print(f"{mod.name:10s} test macro F1 {ev.metrics.macro_f1:.4f}")
    write_rows_csv(rows, run / "eval_metrics.csv")
    write_summary(summary, run / "eval_summary.json")
    return summary


def cmd_bench(cfg: RunConfig) -> list:
    run = Path(cfg.run_dir)
    mods = _ordered(cfg.modalities() + resolve_modalities("MBC-8FG"))
    presets = cfg.presets()
    entries = []
    for mod in mods:
        path = _checkpoint_path(cfg, mod.name)
        if path.is_file() and Checkpoint.load(path).presets == presets:
            entries.append(Checkpoint.load(path))
        else:
            entries.append(build_model(mod, presets, seed=cfg.seed))
    rows = benchmark_latency(entries, cfg.bench.repetitions, cfg.bench.warmup, cfg.bench.threads)
    cfg.dump(run / "config.bench.yaml")
    write_rows_csv([{"modality": r.name, "mean_ms": r.mean_ms, "std_ms": r.std_ms, "ratio": r.ratio, "hz": r.hz}
                    for r in rows], run / "latency.csv")
    for r in rows:
        print(f"{r.name:10s} {r.mean_ms:9.3f} ms  x{r.ratio:6.2f}  {r.hz:8.1f} Hz")
    return rows


def cmd_stream(cfg: RunConfig) -> dict:
    run = Path(cfg.run_dir)
    mods = _ordered(resolve_modalities(cfg.stream.models))
    ckpts = {m.name: _load_checkpoint(cfg, m.name) for m in mods}
    seq_dir = Path(cfg.dataset_dir) / CONTINUOUS
    seqs = load_dataset(seq_dir) if seq_dir.is_dir() else []
    if not seqs:
        raise FileNotFoundError(f"no continuous recordings under {seq_dir}; generate with gen.continuous_sequences > 0")
    cfg.dump(run / "config.stream.yaml")
    pred_dir = _mkdir(run / "predictions")
    rows, acc = [], {name: [] for name in ckpts}
    for rec in seqs:
        res = run_online_eval(ckpts, rec, image_size=cfg.image_size, capacity=cfg.stream.capacity)
        for name, r in res.items():
            r.track.write_csv(pred_dir / f"{rec.id}_{name}.csv")
            rows.append({"recording": rec.id, "modality": name, "frame_accuracy": r.accuracy})
            acc[name].append(r.accuracy)
    write_rows_csv(rows, run / "online.csv")
    summary = {"seed": cfg.seed, "recordings": [r.id for r in seqs],
               "frame_accuracy": {k: float(np.mean(v)) for k, v in acc.items()}}
    write_summary(summary, run / "online_summary.json")
    for name, value in summary["frame_accuracy"].items():
        print(f"{name:10s} frame accuracy {value:.4f}")
    return summary


def _mkdir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval, "bench": cmd_bench, "stream": cmd_stream}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmhar", description="Multi-modal activity recognition experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--modality", help="modality name, comma list, or all17")
        p.add_argument("--preset", choices=["paper", "desk"])
        p.add_argument("--dataset-dir", dest="dataset_dir")
        p.add_argument("--run-dir", dest="run_dir")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, modality=args.modality, preset=args.preset,
                          dataset_dir=args.dataset_dir, run_dir=args.run_dir)
        COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
