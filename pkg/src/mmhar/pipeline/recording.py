"""Raw recordings and interval annotations."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from mmhar.core import ActionLabel, FULL_WIDTH


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    label: ActionLabel


class AnnotationTrack:
    """Ordered, non-overlapping labelled intervals. Gaps read as Idle."""

    def __init__(self, intervals: Iterable[Interval | tuple]):
        items = [iv if isinstance(iv, Interval) else Interval(float(iv[0]), float(iv[1]), ActionLabel(iv[2]))
                 for iv in intervals]
        for iv in items:
            if not iv.end > iv.start:
                raise ValueError(f"interval end must exceed start: {iv}")
        for a, b in zip(items, items[1:]):
            if b.start < a.end:
                raise ValueError(f"intervals overlap or are unsorted: {a} / {b}")
        self.intervals: tuple[Interval, ...] = tuple(items)
        self._starts = np.array([iv.start for iv in items])
        self._ends = np.array([iv.end for iv in items])
        self._labels = np.array([int(iv.label) for iv in items], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, AnnotationTrack) and self.intervals == other.intervals

    @property
    def start(self) -> float:
        return float(self._starts[0]) if len(self) else 0.0

    @property
    def end(self) -> float:
        return float(self._ends[-1]) if len(self) else 0.0

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return (t >= self.start) & (t <= self.end)

    def labels_at(self, t) -> np.ndarray:
        """Label index at each time; half-open intervals, last one closed."""
        t = np.asarray(t, dtype=np.float64)
        out = np.full(t.shape, int(ActionLabel.IDLE), dtype=np.int64)
        if not len(self):
            return out
        k = np.searchsorted(self._starts, t, side="right") - 1
        valid = k >= 0
        kk = np.where(valid, k, 0)
        inside = valid & (t < self._ends[kk])
        out[inside] = self._labels[kk[inside]]
        at_end = t == self._ends[-1]
        out[at_end] = self._labels[-1]
        return out

    def label_at(self, t: float) -> ActionLabel:
        return ActionLabel(int(self.labels_at(np.array([t]))[0]))

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["start_s", "end_s", "label"])
            for iv in self.intervals:
                w.writerow([repr(iv.start), repr(iv.end), iv.label.title])

    @classmethod
    def read_csv(cls, path: str | Path) -> "AnnotationTrack":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(Interval(float(r["start_s"]), float(r["end_s"]), ActionLabel.parse(r["label"])) for r in rows)


def _check_stream(name: str, t: np.ndarray) -> None:
    if t.ndim != 1:
        raise ValueError(f"{name} timestamps must be 1-D")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError(f"{name} timestamps must be strictly increasing")


@dataclass
class Recording:
    """Timestamped IMU and dual-camera streams with optional annotations.

    ``imu`` holds full-glove samples in sensor units (g, deg/s, uT), one
    72-wide row per timestamp. Frames are uint8 grayscale ``(M, H, W)`` or
    colour ``(M, H, W, 3)``. ``contact`` is the generator's ground-truth
    deformation magnitude per top frame and is absent for captured data.
    """

    imu_t: np.ndarray
    imu: np.ndarray
    top_t: np.ndarray
    top: np.ndarray
    bottom_t: np.ndarray
    bottom: np.ndarray
    annotations: Optional[AnnotationTrack] = None
    meta: dict = field(default_factory=dict)
    contact: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("imu", "top", "bottom"):
            _check_stream(name, np.asarray(getattr(self, name + "_t")))
        if self.imu.shape != (len(self.imu_t), FULL_WIDTH):
            raise ValueError(f"imu must be (N, {FULL_WIDTH}), got {self.imu.shape}")
        if not np.all(np.isfinite(self.imu)):
            raise ValueError("imu values must be finite")
        if len(self.top) != len(self.top_t) or len(self.bottom) != len(self.bottom_t):
            raise ValueError("frame and timestamp counts differ")

    @property
    def id(self) -> str:
        return str(self.meta.get("id", "recording"))

    @property
    def duration(self) -> float:
        if self.annotations is not None and len(self.annotations):
            return self.annotations.end - self.annotations.start
        return float(len(self.top_t)) / _rate(self.top_t)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.imu_t, self.imu, self.top_t, self.top, self.bottom_t, self.bottom):
            a = np.ascontiguousarray(arr)
            h.update(str((a.dtype.str, a.shape)).encode())
            h.update(a.tobytes())
        if self.annotations is not None:
            h.update(repr(self.annotations.intervals).encode())
        h.update(json.dumps(self.meta, sort_keys=True).encode())
        return h.hexdigest()


def _rate(t: np.ndarray) -> float:
    if len(t) < 2:
        return 1.0
    return 1.0 / float(np.median(np.diff(t)))
