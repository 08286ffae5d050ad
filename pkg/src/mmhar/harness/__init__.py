from mmhar.harness.checkpoint import Checkpoint, NormMeta, batch_from
from mmhar.harness.latency import LatencyRow, benchmark_latency
from mmhar.harness.metrics import Metrics, confusion_matrix, macro_f1, metrics_from_confusion
from mmhar.harness.training import (
    EvalResult,
    History,
    TrainResult,
    TrainSpec,
    evaluate,
    predict,
    predict_logits,
    train,
)

__all__ = [
    "Checkpoint",
    "NormMeta",
    "batch_from",
    "LatencyRow",
    "benchmark_latency",
    "Metrics",
    "confusion_matrix",
    "macro_f1",
    "metrics_from_confusion",
    "EvalResult",
    "History",
    "TrainResult",
    "TrainSpec",
    "evaluate",
    "predict",
    "predict_logits",
    "train",
]
