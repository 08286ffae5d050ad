"""Single-window inference latency, reported relative to the motion-only baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from mmhar.core import MBC, FULL_GLOVE
from mmhar.harness.checkpoint import Checkpoint
from mmhar.models import HarClassifier, contract_batch

FRAME_RATE_HZ = 30.0


@dataclass
class LatencyRow:
    name: str
    mean_ms: float
    std_ms: float
    ratio: float
    hz: float

    @property
    def realtime(self) -> bool:
        return self.hz >= FRAME_RATE_HZ


def _as_model(entry) -> HarClassifier:
    if isinstance(entry, Checkpoint):
        return entry.model()
    return entry.eval()


def benchmark_latency(entries: Sequence[Checkpoint | HarClassifier], repetitions: int = 30, warmup: int = 3,
                      threads: int = 1) -> list[LatencyRow]:
    """Mean/std wall-clock time of one-window inference per model.

    Models are timed round-robin so slow drifts in machine load hit all of
    them equally. Ratios are against MBC-8FG, or the first MBC entry if the
    full glove is absent.
    """
    if repetitions < 30:
        raise ValueError("repetitions must be at least 30")
    models = [_as_model(e) for e in entries]
    mbc = [i for i, m in enumerate(models) if m.modality.family == MBC]
    if not mbc:
        raise ValueError("latency table needs at least one MBC model as baseline")
    base = next((i for i in mbc if models[i].modality.config == FULL_GLOVE), mbc[0])
    inputs = [contract_batch(m, 1, seed=i) for i, m in enumerate(models)]
    times = np.zeros((len(models), repetitions))
    prev_threads = torch.get_num_threads()
    torch.set_num_threads(threads)
    try:
        with torch.inference_mode():
            for m, x in zip(models, inputs):
                for _ in range(warmup):
                    m(x)
            for r in range(repetitions):
                for i, (m, x) in enumerate(zip(models, inputs)):
                    t0 = time.perf_counter()
                    m(x)
                    times[i, r] = time.perf_counter() - t0
    finally:
        torch.set_num_threads(prev_threads)
    ms = times * 1000.0
    means = ms.mean(axis=1)
    return [
        LatencyRow(m.modality.name, float(means[i]), float(ms[i].std()), float(means[i] / means[base]),
                   float(1000.0 / means[i]))
        for i, m in enumerate(models)
    ]
