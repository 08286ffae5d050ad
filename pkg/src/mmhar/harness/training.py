"""Offline training and evaluation."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from mmhar.core import NUM_CLASSES, InputModality, parse_modality
from mmhar.errors import NonFiniteLoss
from mmhar.harness.checkpoint import Checkpoint, NormMeta, batch_from
from mmhar.harness.metrics import Metrics, confusion_matrix, metrics_from_confusion
from mmhar.models import HarClassifier, Presets, build_model
from mmhar.pipeline import ImuRanges, WindowSet


@dataclass(frozen=True)
class TrainSpec:
    """Optimiser settings. These are artifact defaults, not published values."""

    learning_rate: float = 3e-4
    batch_size: int = 8
    max_epochs: int = 200
    patience: int = 20
    seed: int = 0
    weight_decay: float = 0.0
    target_loss: Optional[float] = None  # stop once an epoch's mean train loss falls below this
    eval_batch_size: int = 32

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("training hyperparameters must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


@dataclass
class History:
    epochs: list = field(default_factory=list)

    def record(self, epoch: int, train_loss: float, val_f1: float) -> None:
        self.epochs.append({"epoch": epoch, "train_loss": train_loss, "val_f1": val_f1})

    @property
    def train_loss(self) -> list[float]:
        return [e["train_loss"] for e in self.epochs]

    @property
    def val_f1(self) -> list[float]:
        return [e["val_f1"] for e in self.epochs]

    @property
    def best_epoch(self) -> int:
        return int(np.argmax(self.val_f1)) + 1 if self.epochs else 0

    def __eq__(self, other) -> bool:
        return isinstance(other, History) and self.epochs == other.epochs


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: History


def predict_logits(model: HarClassifier, ws: WindowSet, batch_size: int = 32) -> np.ndarray:
    dtype = next(model.parameters()).dtype
    model.eval()
    out = []
    with torch.inference_mode():
        for a in range(0, len(ws), batch_size):
            idx = np.arange(a, min(len(ws), a + batch_size))
            out.append(model(batch_from(ws, idx, model.modality, dtype)).float().numpy())
    if not out:
        return np.zeros((0, NUM_CLASSES), np.float32)
    return np.concatenate(out)


def predict(model: HarClassifier, ws: WindowSet, batch_size: int = 32) -> np.ndarray:
    return predict_logits(model, ws, batch_size).argmax(axis=1)


def train(modality: InputModality | str, splits: Sequence[WindowSet], spec: TrainSpec = TrainSpec(),
          presets: Optional[Presets] = None, ranges: ImuRanges = ImuRanges()) -> TrainResult:
    """Minimise cross-entropy on the train split, keeping the best-validation-F1 parameters.

    ``splits`` is ``(train, val)`` or ``(train, val, test)``; the test split is
    ignored.
    """
    modality = parse_modality(modality)
    train_ws, val_ws = splits[0], splits[1]
    if len(train_ws) == 0 or len(val_ws) == 0:
        raise ValueError("train and validation splits must be non-empty")
    presets = presets or Presets.desk()
    model = build_model(modality, presets, seed=spec.seed)
    # Fail early on missing streams.
    batch_from(train_ws, [0], modality)
    batch_from(val_ws, [0], modality)

    opt = torch.optim.Adam(model.parameters(), lr=spec.learning_rate, weight_decay=spec.weight_decay)
    loss_fn = nn.CrossEntropyLoss()
    gen = torch.Generator().manual_seed(spec.seed)
    labels = torch.as_tensor(train_ws.labels, dtype=torch.long)
    history = History()
    best_f1, best_state, stale = -1.0, None, 0

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(spec.seed)
        for epoch in range(1, spec.max_epochs + 1):
            model.train()
            order = torch.randperm(len(train_ws), generator=gen).numpy()
            total, seen = 0.0, 0
            for b, a in enumerate(range(0, len(order), spec.batch_size)):
                idx = order[a:a + spec.batch_size]
                logits = model(batch_from(train_ws, idx, modality))
                loss = loss_fn(logits, labels[idx])
                if not torch.isfinite(loss):
                    raise NonFiniteLoss(epoch, b, loss.item())
                opt.zero_grad()
                loss.backward()
                opt.step()
                total += loss.item() * len(idx)
                seen += len(idx)
            train_loss = total / seen
            val_pred = predict(model, val_ws, spec.eval_batch_size)
            val_f1 = metrics_from_confusion(confusion_matrix(val_ws.labels, val_pred)).macro_f1
            history.record(epoch, train_loss, val_f1)
            if val_f1 > best_f1:
                best_f1, stale = val_f1, 0
                best_state = copy.deepcopy(model.state_dict())
            else:
                stale += 1
            if stale >= spec.patience:
                break
            if spec.target_loss is not None and train_loss < spec.target_loss:
                break

    ckpt = Checkpoint(modality, presets, best_state, NormMeta.from_windows(train_ws, ranges), spec.seed)
    return TrainResult(ckpt, history)


@dataclass
class EvalResult:
    metrics: Metrics
    confusion: np.ndarray
    predictions: np.ndarray


def evaluate(checkpoint: Checkpoint, split: WindowSet, batch_size: int = 32) -> EvalResult:
    """Argmax predictions, confusion matrix and macro-F1 metrics on one split."""
    pred = predict(checkpoint.model(), split, batch_size)
    cm = confusion_matrix(split.labels, pred)
    return EvalResult(metrics_from_confusion(cm), cm, pred)


def spec_dict(spec: TrainSpec) -> dict:
    return asdict(spec)
