"""Confusion matrices and F1 scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from mmhar.core import NUM_CLASSES


def confusion_matrix(y_true, y_pred, classes: int = NUM_CLASSES) -> np.ndarray:
    """Counts with rows = ground truth, columns = prediction."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("truth and prediction lengths differ")
    cm = np.zeros((classes, classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


@dataclass
class Metrics:
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_f1: float
    accuracy: float
    support: np.ndarray
    latency_ms: float | None = None
    latency_ratio: float | None = None
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {"macro_f1": self.macro_f1, "accuracy": self.accuracy, "f1_average": "macro"}
        if self.latency_ms is not None:
            out["latency_ms"] = self.latency_ms
            out["latency_ratio"] = self.latency_ratio
        return out


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    """Per-class precision/recall/F1 with undefined ratios scored as 0.

    The macro average runs over classes that occur in the truth or the
    predictions; classes absent from both carry no information.
    """
    cm = np.asarray(cm, dtype=np.int64)
    diag = np.diag(cm)
    tp = diag.astype(np.float64)
    predicted = cm.sum(axis=0).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    total = cm.sum()
    present = np.flatnonzero((actual > 0) | (predicted > 0))
    # Exact rational mean so the score does not depend on summation order.
    exact = [Fraction(2 * int(diag[c]), int(predicted[c] + actual[c])) for c in present]
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        macro_f1=float(sum(exact, Fraction(0)) / len(exact)) if exact else 0.0,
        accuracy=float(tp.sum() / total) if total else 0.0,
        support=actual.astype(np.int64),
    )


def macro_f1(y_true, y_pred, classes: int = NUM_CLASSES) -> float:
    return metrics_from_confusion(confusion_matrix(y_true, y_pred, classes)).macro_f1
