"""Windowing, dataset splitting and image standardisation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from mmhar.core import FULL_GLOVE, NUM_CLASSES, ActionLabel, SensorConfig, channel_indices, feature_width
from mmhar.errors import DegenerateSplit
from mmhar.pipeline.recording import Recording
from mmhar.pipeline.transforms import ImuRanges, align_imu_to_frames, align_indices, normalize_imu, preprocess_frames

WINDOW_LEN = 90


@dataclass
class Window:
    imu: Optional[np.ndarray]
    top: Optional[np.ndarray]
    bottom: Optional[np.ndarray]
    label: ActionLabel
    origin: tuple[str, int, float]


@dataclass
class WindowSet:
    """Columnar batch of windows.

    ``imu`` is ``(N, T, F)`` normalised IMU whose columns follow ``config``;
    ``top``/``bottom`` are ``(N, T, S, S)`` float32 frames. Streams that were
    not materialised are ``None``. ``image_stats`` is the (mean, std) pair
    the frames were standardised with, if any.
    """

    imu: Optional[np.ndarray]
    top: Optional[np.ndarray]
    bottom: Optional[np.ndarray]
    labels: np.ndarray
    origins: list = field(default_factory=list)
    config: SensorConfig = FULL_GLOVE
    image_stats: Optional[tuple[float, float]] = None
    stats_source: Optional[str] = None

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> Window:
        return Window(
            None if self.imu is None else self.imu[i],
            None if self.top is None else self.top[i],
            None if self.bottom is None else self.bottom[i],
            ActionLabel(int(self.labels[i])),
            self.origins[i],
        )

    @property
    def streams(self) -> tuple[str, ...]:
        return tuple(s for s in ("imu", "top", "bottom") if getattr(self, s) is not None)

    @property
    def image_size(self) -> Optional[int]:
        frames = self.top if self.top is not None else self.bottom
        return None if frames is None else frames.shape[-1]

    def select(self, idx) -> "WindowSet":
        idx = np.asarray(idx, dtype=np.int64)
        take = lambda a: None if a is None else a[idx]
        return replace(
            self,
            imu=take(self.imu),
            top=take(self.top),
            bottom=take(self.bottom),
            labels=self.labels[idx],
            origins=[self.origins[i] for i in idx],
        )

    def with_config(self, config: SensorConfig) -> "WindowSet":
        """Restrict full-glove IMU columns to ``config``."""
        if self.config == config:
            return self
        if self.config != FULL_GLOVE:
            raise ValueError(f"can only mask from full-glove windows, these are {self.config.name}")
        imu = None if self.imu is None else np.ascontiguousarray(self.imu[:, :, channel_indices(config)])
        return replace(self, imu=imu, config=config)

    @staticmethod
    def concat(sets: Sequence["WindowSet"]) -> "WindowSet":
        sets = [s for s in sets if len(s)] or list(sets[:1])
        first = sets[0]
        cat = lambda name: None if getattr(first, name) is None else np.concatenate([getattr(s, name) for s in sets])
        return replace(
            first,
            imu=cat("imu"),
            top=cat("top"),
            bottom=cat("bottom"),
            labels=np.concatenate([s.labels for s in sets]),
            origins=[o for s in sets for o in s.origins],
        )


def _empty(config, streams, window_len, size) -> WindowSet:
    f = feature_width(config)
    return WindowSet(
        imu=np.zeros((0, window_len, f), np.float32) if "imu" in streams else None,
        top=np.zeros((0, window_len, size, size), np.float32) if "top" in streams else None,
        bottom=np.zeros((0, window_len, size, size), np.float32) if "bottom" in streams else None,
        labels=np.zeros(0, np.int64),
        config=config,
    )


def segment(
    recording: Recording,
    window_len: int = WINDOW_LEN,
    config: SensorConfig = FULL_GLOVE,
    image_size: Optional[int] = None,
    ranges: ImuRanges = ImuRanges(),
    streams: Sequence[str] = ("imu", "top", "bottom"),
) -> WindowSet:
    """Tile a recording into non-overlapping windows of ``window_len`` frames.

    IMU samples are aligned to top-camera frames, normalised by full scale and
    restricted to ``config``; frames are cropped, converted and resized. The
    label of each window is the annotation at its temporal midpoint.
    """
    if window_len < 1:
        raise ValueError("window_len must be positive")
    streams = tuple(streams)
    if image_size is None:
        image_size = min(recording.top.shape[1:3])
    n = len(recording.top_t) // window_len
    if n == 0:
        return _empty(config, streams, window_len, image_size)
    used = n * window_len
    frame_t = recording.top_t[:used]

    imu = top = bottom = None
    if "imu" in streams:
        aligned = align_imu_to_frames(recording)[:used]
        normed = normalize_imu(aligned, ranges)[:, channel_indices(config)]
        imu = normed.astype(np.float32).reshape(n, window_len, -1)
    if "top" in streams:
        top = preprocess_frames(recording.top[:used], image_size).reshape(n, window_len, image_size, image_size)
    if "bottom" in streams:
        if len(recording.bottom_t) >= used and np.array_equal(recording.bottom_t[:used], frame_t):
            idx = np.arange(used)
        else:
            period = float(np.median(np.diff(recording.top_t))) if used > 1 else 1.0
            idx = align_indices(recording.bottom_t, frame_t, period)
        bottom = preprocess_frames(recording.bottom[idx], image_size).reshape(n, window_len, image_size, image_size)

    starts = np.arange(n) * window_len
    mids = (frame_t[starts] + frame_t[starts + window_len - 1]) / 2.0
    if recording.annotations is not None:
        labels = recording.annotations.labels_at(mids)
    elif "label" in recording.meta:
        labels = np.full(n, int(ActionLabel.parse(recording.meta["label"])), np.int64)
    else:
        raise ValueError(f"recording {recording.id} has no annotations to label windows")
    origins = [(recording.id, int(s), float(frame_t[s])) for s in starts]
    return WindowSet(imu, top, bottom, labels.astype(np.int64), origins, config)


def segment_all(recordings: Sequence[Recording], **kwargs) -> WindowSet:
    return WindowSet.concat([segment(r, **kwargs) for r in recordings])


def _split_targets(n: int, fractions: Sequence[float]) -> np.ndarray:
    """Largest-remainder apportionment of n items."""
    raw = np.asarray(fractions, dtype=np.float64) * n
    base = np.floor(raw + 1e-9).astype(np.int64)
    extra = n - base.sum()
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:extra]] += 1
    return base


def stratified_counts(class_counts: Sequence[int], fractions: Sequence[float]) -> np.ndarray:
    """Per-class split sizes within one of proportional, matching global totals.

    Each class starts from the floor of its quota; the leftover items are
    handed out greedily to the splits with the largest outstanding global
    need, never twice to the same split for one class.
    """
    counts = np.asarray(class_counts, dtype=np.int64)
    frac = np.asarray(fractions, dtype=np.float64)
    quota = counts[:, None] * frac[None, :]
    out = np.floor(quota + 1e-9).astype(np.int64)
    need = _split_targets(int(counts.sum()), frac) - out.sum(axis=0)
    remainder = quota - out
    for c in np.argsort(-counts, kind="stable"):
        k = int(counts[c] - out[c].sum())
        if k == 0:
            continue
        ranked = sorted(range(len(frac)), key=lambda s: (-need[s], -int(remainder[c, s] > 1e-9), -remainder[c, s], s))
        for s in ranked[:k]:
            out[c, s] += 1
            need[s] -= 1
    return out


def split_dataset(windows: WindowSet, fractions: Sequence[float] = (0.6, 0.2, 0.2), seed: int = 0):
    """Seeded, class-stratified partition into (train, val, test)."""
    if len(windows) == 0:
        raise ValueError("cannot split an empty window set")
    if abs(sum(fractions) - 1.0) > 1e-9 or any(f < 0 for f in fractions):
        raise ValueError("fractions must be non-negative and sum to 1")
    classes = np.unique(windows.labels)
    if len(windows) < len(classes):
        raise ValueError("fewer windows than classes")
    rng = np.random.default_rng(seed)
    per_class = [rng.permutation(np.flatnonzero(windows.labels == c)) for c in classes]
    table = stratified_counts([len(p) for p in per_class], fractions)
    parts: list[list[int]] = [[] for _ in fractions]
    for members, row in zip(per_class, table):
        pos = 0
        for s, k in enumerate(row):
            parts[s].extend(members[pos:pos + k].tolist())
            pos += k
    out = []
    for p in parts:
        idx = rng.permutation(np.asarray(p, dtype=np.int64))
        out.append(windows.select(idx))
    return tuple(out)


class StatsSource(str, Enum):
    PER_SPLIT = "per_split"
    TRAIN_ONLY = "train_only"


@dataclass
class SplitStats:
    source: StatsSource
    mean: dict
    std: dict
    assignment: dict

    def applied(self, name: str) -> tuple[float, float]:
        key = name if self.source is StatsSource.PER_SPLIT else next(iter(self.mean))
        return self.mean[key], self.std[key]


def image_moments(ws: WindowSet) -> tuple[float, float]:
    """Mean and std over every pixel of both cameras, accumulated in float64."""
    arrays = [a for a in (ws.top, ws.bottom) if a is not None]
    if not arrays or sum(a.size for a in arrays) == 0:
        raise DegenerateSplit("split has no frames")
    n = sum(a.size for a in arrays)
    total = sum(float(np.sum(w, dtype=np.float64)) for a in arrays for w in a)
    mean = total / n
    sq = sum(float(np.sum((w.astype(np.float64) - mean) ** 2)) for a in arrays for w in a)
    return mean, float(np.sqrt(sq / n))


def apply_image_stats(ws: WindowSet, mean: float, std: float, source: str) -> WindowSet:
    def scale(a):
        if a is None:
            return None
        out = np.empty_like(a, dtype=np.float32)
        for i, w in enumerate(a):
            out[i] = ((w.astype(np.float64) - mean) / std).astype(np.float32)
        return out

    return replace(ws, top=scale(ws.top), bottom=scale(ws.bottom), image_stats=(mean, std), stats_source=source)


def standardize(splits, source: StatsSource | str = StatsSource.PER_SPLIT):
    """Standardise frames of each split as (x - mean) / std.

    ``splits`` is a ``(train, val, test)`` tuple or a name -> WindowSet dict;
    the first entry is treated as the training split. Returns the
    standardised splits in the same container type plus their SplitStats.
    """
    source = StatsSource(source)
    named = dict(splits) if isinstance(splits, dict) else dict(zip(("train", "val", "test"), splits))
    if not named or any(len(ws) == 0 for ws in named.values()):
        raise ValueError("every split must be non-empty")
    means, stds = {}, {}
    names = list(named)
    if all(ws.top is None and ws.bottom is None for ws in named.values()):
        stats = SplitStats(source, means, stds, {n: list(ws.origins) for n, ws in named.items()})
        return splits, stats
    for name in names if source is StatsSource.PER_SPLIT else names[:1]:
        m, s = image_moments(named[name])
        if s < 1e-8:
            raise DegenerateSplit(f"split {name!r} has near-zero pixel std ({s:.3g})")
        means[name], stds[name] = m, s
    stats = SplitStats(source, means, stds, {n: list(ws.origins) for n, ws in named.items()})
    out = {n: apply_image_stats(ws, *stats.applied(n), source.value) for n, ws in named.items()}
    if isinstance(splits, dict):
        return out, stats
    return tuple(out[n] for n in names), stats


def class_counts(ws: WindowSet) -> np.ndarray:
    return np.bincount(ws.labels, minlength=NUM_CLASSES)
