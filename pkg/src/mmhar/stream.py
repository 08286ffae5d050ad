"""Online moving-window classification over continuous recordings."""

from __future__ import annotations

import csv
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
import torch

from mmhar.core import ActionLabel, channel_indices
from mmhar.errors import EmptyPredictions, NonMonotonicTimestamp
from mmhar.harness.checkpoint import Checkpoint
from mmhar.pipeline import WINDOW_LEN, AnnotationTrack, Recording, align_indices, normalize_imu, preprocess_frame

STREAMS = ("imu", "top", "bottom")


@dataclass
class Snapshot:
    """A consistent 90-sample window assembled at query time ``t``."""

    t: float
    timestamps: np.ndarray
    imu: Optional[np.ndarray]  # raw sensor units, (T, 72)
    top: Optional[np.ndarray]  # preprocessed, unstandardised, (T, S, S)
    bottom: Optional[np.ndarray]


class StreamBuffer:
    """Per-stream ring buffers fed one sample at a time.

    Frames are preprocessed on arrival. The top camera is the clock: a
    window is the latest ``window_len`` top frames with timestamps at or
    before the query time, and IMU samples and bottom frames are aligned to
    those timestamps when the window is assembled. Only samples stamped at
    or before the query time are considered.
    """

    def __init__(self, image_size: int, capacity: int = 180, frame_rate: float = 30.0, imu_rate: float = 40.0,
                 window_len: int = WINDOW_LEN, audit: bool = False):
        if capacity < window_len:
            raise ValueError("capacity must hold at least one window")
        self.image_size = image_size
        self.window_len = window_len
        self.frame_period = 1.0 / frame_rate
        self.imu_period = 1.0 / imu_rate
        imu_cap = math.ceil(capacity * imu_rate / frame_rate) + 2
        self._buf = {
            "imu": deque(maxlen=imu_cap),
            "top": deque(maxlen=capacity),
            "bottom": deque(maxlen=capacity),
        }
        self._last = {s: -math.inf for s in STREAMS}
        self._lock = threading.Lock()
        self.audit = audit
        self.reads: list[tuple[float, float]] = []

    def push(self, stream: str, t: float, payload) -> None:
        if stream not in self._buf:
            raise ValueError(f"unknown stream {stream!r}")
        t = float(t)
        if t < self._last[stream]:
            raise NonMonotonicTimestamp(f"{stream} sample at t={t} precedes t={self._last[stream]}")
        if stream == "imu":
            item = np.asarray(payload, dtype=np.float64).reshape(-1)
        else:
            item = preprocess_frame(payload, self.image_size)
        with self._lock:
            self._buf[stream].append((t, item))
            self._last[stream] = t

    def push_imu(self, t: float, values) -> None:
        self.push("imu", t, values)

    def push_top(self, t: float, image) -> None:
        self.push("top", t, image)

    def push_bottom(self, t: float, image) -> None:
        self.push("bottom", t, image)

    def __len__(self) -> int:
        return len(self._buf["top"])

    def _visible(self, stream: str, t: float) -> list:
        return [item for item in self._buf[stream] if item[0] <= t]

    def ready(self, t: float, streams: Sequence[str] = STREAMS) -> bool:
        with self._lock:
            clock = self._visible("top", t)
            return len(clock) >= self.window_len and all(self._visible(s, t) for s in streams)

    def snapshot(self, t: float, streams: Sequence[str] = STREAMS) -> Optional[Snapshot]:
        """Window ending at ``t`` or None when not enough contiguous data.

        Raises AlignmentGap if an IMU sample or bottom frame is missing for
        some clock tick.
        """
        with self._lock:
            visible = {s: self._visible(s, t) for s in set(streams) | {"top"}}
        clock = visible["top"][-self.window_len:]
        if len(clock) < self.window_len:
            return None
        ts = np.array([c[0] for c in clock])
        if np.any(np.diff(ts) > 2 * self.frame_period + 1e-9):
            return None
        if any(not visible[s] for s in streams):
            return None
        out = {"imu": None, "top": None, "bottom": None}
        latest = ts[-1]
        if "top" in streams:
            out["top"] = np.stack([c[1] for c in clock])
        if "bottom" in streams:
            bt = np.array([b[0] for b in visible["bottom"]])
            idx = align_indices(bt, ts, self.frame_period)
            out["bottom"] = np.stack([visible["bottom"][i][1] for i in idx])
            latest = max(latest, bt[idx].max())
        if "imu" in streams:
            it = np.array([s[0] for s in visible["imu"]])
            idx = align_indices(it, ts, 2 * self.imu_period)
            out["imu"] = np.stack([visible["imu"][i][1] for i in idx])
            latest = max(latest, it[idx].max())
        if self.audit:
            considered = max(v[-1][0] for v in visible.values() if v)
            self.reads.append((float(t), float(max(latest, considered))))
        return Snapshot(float(t), ts, out["imu"], out["top"], out["bottom"])


class OnlineClassifier:
    """Checkpoint wrapped with the frozen preprocessing it was trained with."""

    def __init__(self, checkpoint: Checkpoint):
        self.checkpoint = checkpoint
        self.model = checkpoint.model()
        self.modality = checkpoint.modality
        self.norm = checkpoint.norm
        self.name = checkpoint.name

    @property
    def streams(self) -> tuple[str, ...]:
        return self.modality.streams

    def inputs(self, snap: Snapshot) -> dict:
        batch = {}
        if self.modality.uses_imu:
            imu = normalize_imu(snap.imu, self.norm.imu_ranges)[:, channel_indices(self.modality.config)]
            batch["imu"] = torch.from_numpy(imu.astype(np.float32))[None]
        for stream in ("top", "bottom"):
            if stream in self.streams:
                frames = getattr(snap, stream)
                if self.norm.image_mean is not None:
                    frames = ((frames.astype(np.float64) - self.norm.image_mean) / self.norm.image_std)
                batch[stream] = torch.from_numpy(np.ascontiguousarray(frames, dtype=np.float32))[None]
        return batch

    def logits(self, snap: Snapshot) -> np.ndarray:
        with torch.inference_mode():
            return self.model(self.inputs(snap))[0].numpy()

    def predict(self, snap: Optional[Snapshot], t: Optional[float] = None) -> ActionLabel:
        if snap is None:
            return ActionLabel.IDLE
        return ActionLabel(int(np.argmax(self.logits(snap))))


def tick(model: OnlineClassifier | Checkpoint, buffer: StreamBuffer, t: float) -> ActionLabel:
    """Label for the window ending at ``t``; Idle until a full window is buffered."""
    if isinstance(model, Checkpoint):
        model = OnlineClassifier(model)
    return model.predict(buffer.snapshot(t, model.streams))


@dataclass
class PredictionTrack:
    timestamps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.timestamps.shape != self.labels.shape:
            raise ValueError("timestamps and labels differ in length")
        if self.timestamps.size > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("prediction timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PredictionTrack) and np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.labels, other.labels))

    @classmethod
    def from_truth(cls, truth: AnnotationTrack, timestamps) -> "PredictionTrack":
        return cls(timestamps, truth.labels_at(timestamps))

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "label"])
            for t, lab in zip(self.timestamps, self.labels):
                w.writerow([repr(float(t)), ActionLabel(int(lab)).title])

    @classmethod
    def read_csv(cls, path: str | Path) -> "PredictionTrack":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([float(r["timestamp"]) for r in rows], [int(ActionLabel.parse(r["label"])) for r in rows])


def frame_accuracy(predictions: PredictionTrack, truth: AnnotationTrack) -> float:
    """Fraction of prediction timestamps whose label matches the annotation."""
    if len(predictions) == 0:
        raise EmptyPredictions("no predictions to score")
    if not np.all(truth.contains(predictions.timestamps)):
        raise ValueError("prediction timestamps fall outside the annotated timeline")
    return float(np.mean(predictions.labels == truth.labels_at(predictions.timestamps)))


def transition_lags(predictions: PredictionTrack, truth: AnnotationTrack, horizon: int = WINDOW_LEN):
    """Frames from each annotated label change until the prediction first agrees.

    Entries are None where the prediction never takes the new label within
    the interval plus ``horizon`` frames.
    """
    ts, labs = predictions.timestamps, predictions.labels
    lags = []
    prev = None
    for iv in truth:
        if prev is not None and iv.label != prev:
            start = int(np.searchsorted(ts, iv.start, side="left"))
            stop = int(np.searchsorted(ts, iv.end, side="left")) + horizon
            hits = np.flatnonzero(labs[start:stop] == int(iv.label))
            lags.append(int(hits[0]) if hits.size else None)
        prev = iv.label
    return lags


def replay_events(recording: Recording):
    """(t, stream, payload) in arrival order; at equal times IMU and bottom precede top."""
    rank = {"imu": 0, "bottom": 1, "top": 2}
    items = []
    for stream, t, data in (("imu", recording.imu_t, recording.imu), ("top", recording.top_t, recording.top),
                            ("bottom", recording.bottom_t, recording.bottom)):
        items.extend((float(ti), rank[stream], i, stream) for i, ti in enumerate(t))
    items.sort()
    for t, _, i, stream in items:
        yield t, stream, getattr(recording, stream)[i]


@dataclass
class OnlineResult:
    track: PredictionTrack
    accuracy: float


def run_online_eval(models: Mapping[str, Checkpoint] | Sequence, recording: Recording,
                    image_size: Optional[int] = None, capacity: int = 180, audit: bool = False,
                    buffer: Optional[StreamBuffer] = None) -> dict[str, OnlineResult]:
    """Replay a recording sample by sample, ticking every model at each top frame.

    ``models`` maps names to checkpoints, or to any object with
    ``streams`` and ``predict(snapshot_or_None, t)``.
    """
    if recording.annotations is None:
        raise ValueError("online evaluation needs an annotated recording")
    if isinstance(models, Mapping):
        entries = list(models.items())
    else:
        entries = [(getattr(m, "name", str(i)), m) for i, m in enumerate(models)]
    clfs = [(name, OnlineClassifier(m) if isinstance(m, Checkpoint) else m) for name, m in entries]
    if image_size is None:
        sizes = {c.norm.image_size for _, c in clfs if isinstance(c, OnlineClassifier) and c.norm.image_size}
        image_size = sizes.pop() if len(sizes) == 1 else min(recording.top.shape[1:3])
    if buffer is None:
        buffer = StreamBuffer(image_size, capacity, audit=audit)
    times: list[float] = []
    preds: dict[str, list[int]] = {name: [] for name, _ in clfs}
    for t, stream, payload in replay_events(recording):
        buffer.push(stream, t, payload)
        if stream != "top":
            continue
        times.append(t)
        for name, clf in clfs:
            preds[name].append(int(clf.predict(buffer.snapshot(t, clf.streams), t)))
    out = {}
    for name, _ in clfs:
        track = PredictionTrack(times, preds[name])
        out[name] = OnlineResult(track, frame_accuracy(track, recording.annotations))
    return out


class AnnotationOracle:
    """Predicts the annotated label at each window's midpoint; a perfect offline predictor."""

    name = "oracle"
    streams = ("top",)

    def __init__(self, truth: AnnotationTrack):
        self.truth = truth

    def predict(self, snap: Optional[Snapshot], t: Optional[float] = None) -> ActionLabel:
        if snap is None:
            return ActionLabel.IDLE
        mid = (snap.timestamps[0] + snap.timestamps[-1]) / 2.0
        return self.truth.label_at(mid)
