"""Reusable end-to-end experiment recipes shared by scripts and tests."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from mmhar.core import ActionLabel
from mmhar.harness import Checkpoint, TrainSpec, evaluate, train
from mmhar.models import Presets
from mmhar.pipeline import segment_all, split_dataset, standardize
from mmhar.stream import run_online_eval
from mmhar.synthgen import GenParams, gen_continuous_sequence, gen_segmented_dataset

BEST_MODELS = ("MBC-8FG", "TBC-2", "MMC-8FG")
# Desk settings: 30 s segments give 10 windows per recording, 20 per class.
BENCH_TRAIN = TrainSpec(learning_rate=1e-3, max_epochs=40, patience=8)
BENCH_SEGMENT_S = 30.0


@dataclass
class SeedRun:
    seed: int
    f1: dict
    epochs: dict
    checkpoints: dict = field(repr=False, default_factory=dict)


def run_seed(seed: int, modalities: Sequence[str] = BEST_MODELS, participants: int = 1,
             segment_duration: float = BENCH_SEGMENT_S, spec: TrainSpec = BENCH_TRAIN,
             presets: Presets | None = None) -> SeedRun:
    """Generate, split, standardise, train and test every modality for one seed."""
    params = GenParams.desk(seed=seed, segment_duration=segment_duration)
    ws = segment_all(gen_segmented_dataset(participants, params), image_size=params.image_size)
    (tr, va, te), _ = standardize(split_dataset(ws, seed=seed))
    del ws
    spec = replace(spec, seed=seed)
    f1, epochs, ckpts = {}, {}, {}
    for name in modalities:
        res = train(name, (tr, va), spec, presets or Presets.desk())
        f1[name] = evaluate(res.checkpoint, te).metrics.macro_f1
        epochs[name] = len(res.history.epochs)
        ckpts[name] = res.checkpoint
    return SeedRun(seed, f1, epochs, ckpts)


def mean_f1(runs: Sequence[SeedRun]) -> dict:
    return {name: float(np.mean([r.f1[name] for r in runs])) for name in runs[0].f1}


def continuous_order() -> list[ActionLabel]:
    return list(ActionLabel)


def online_accuracy(checkpoints: dict[str, Checkpoint], seed: int, participant: int = 1,
                    action_duration: float = 4.0, pause_duration: float = 2.0, relaxation: bool = True) -> dict:
    """Frame accuracy of each checkpoint on one continuous synthetic sequence."""
    params = GenParams.desk(seed=seed, relaxation=relaxation)
    seq = gen_continuous_sequence(continuous_order(), action_duration, pause_duration, params,
                                  participant=participant)
    return {k: v.accuracy for k, v in run_online_eval(checkpoints, seq).items()}
