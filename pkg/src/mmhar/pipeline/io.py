"""Dataset-on-disk layout for recordings and windowed datasets.

A recording directory holds::

    imu.csv                  timestamp + 72 channel columns (A_acc_x ...)
    frames_top/000000.png    8-bit grayscale frames, one file per frame
    frames_top/timestamps.csv
    frames_bottom/...        same as frames_top
    annotations.csv          start_s, end_s, label (optional)
    meta.txt                 key=value lines, values JSON-encoded

Captured data converted to this layout can replace synthetic data.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from mmhar.core import FULL_GLOVE, channel_names, get_config
from mmhar.pipeline.recording import AnnotationTrack, Recording
from mmhar.pipeline.windows import WindowSet

FRAME_DIRS = {"top": "frames_top", "bottom": "frames_bottom"}


def _write_floats(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*(np.asarray(c, dtype=np.float64).tolist() for c in columns)):
            w.writerow([repr(v) for v in row])


def _write_frames(folder: Path, t: np.ndarray, frames: np.ndarray) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    width = max(6, len(str(len(frames))))
    names = []
    for i, frame in enumerate(frames):
        name = f"{i:0{width}d}.png"
        Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(folder / name, optimize=False)
        names.append(name)
    with open(folder / "timestamps.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["file", "timestamp"])
        for name, ti in zip(names, np.asarray(t, dtype=np.float64).tolist()):
            w.writerow([name, repr(ti)])


def _read_frames(folder: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(folder / "timestamps.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["timestamp"]) for r in rows], dtype=np.float64)
    frames = [np.asarray(Image.open(folder / r["file"])) for r in rows]
    if not frames:
        return t, np.zeros((0, 1, 1), np.uint8)
    return t, np.stack(frames)


def save_recording(recording: Recording, folder: str | Path) -> Path:
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    _write_floats(folder / "imu.csv", ["timestamp", *channel_names()],
                  [recording.imu_t, *np.asarray(recording.imu).T])
    for stream, sub in FRAME_DIRS.items():
        _write_frames(folder / sub, getattr(recording, stream + "_t"), getattr(recording, stream))
    if recording.annotations is not None:
        recording.annotations.write_csv(folder / "annotations.csv")
    lines = [f"{k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(recording.meta.items())]
    (folder / "meta.txt").write_text("\n".join(lines) + "\n")
    return folder


def load_recording(folder: str | Path) -> Recording:
    folder = Path(folder)
    if not (folder / "imu.csv").is_file():
        raise FileNotFoundError(f"no imu.csv in {folder}")
    with open(folder / "imu.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["timestamp", *channel_names()]:
            raise ValueError(f"{folder / 'imu.csv'}: unexpected columns")
        rows = np.array([[float(v) for v in r] for r in reader], dtype=np.float64).reshape(-1, len(header))
    streams = {s: _read_frames(folder / sub) for s, sub in FRAME_DIRS.items()}
    ann = folder / "annotations.csv"
    meta = {}
    if (folder / "meta.txt").is_file():
        for line in (folder / "meta.txt").read_text().splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                meta[key] = json.loads(value)
    return Recording(
        imu_t=rows[:, 0].copy(),
        imu=np.ascontiguousarray(rows[:, 1:]),
        top_t=streams["top"][0],
        top=streams["top"][1],
        bottom_t=streams["bottom"][0],
        bottom=streams["bottom"][1],
        annotations=AnnotationTrack.read_csv(ann) if ann.is_file() else None,
        meta=meta,
    )


def save_dataset(recordings: Iterable[Recording], root: str | Path) -> list[Path]:
    root = Path(root)
    return [save_recording(r, root / r.id) for r in recordings]


def recording_dirs(root: str | Path) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    return sorted(p for p in root.iterdir() if (p / "imu.csv").is_file())


def load_dataset(root: str | Path) -> list[Recording]:
    return [load_recording(p) for p in recording_dirs(root)]


def save_windows(ws: WindowSet, folder: str | Path) -> Path:
    """``.npy`` arrays plus ``index.csv`` (window id, recording id, start frame, label)."""
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    for name in ("imu", "top", "bottom"):
        arr = getattr(ws, name)
        path = folder / f"{name}.npy"
        if arr is not None:
            np.save(path, arr)
        elif path.exists():
            path.unlink()
    np.save(folder / "labels.npy", ws.labels)
    with open(folder / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window_id", "recording_id", "start_frame", "start_s", "label"])
        for i, ((rec, frame, t), lab) in enumerate(zip(ws.origins, ws.labels)):
            w.writerow([i, rec, frame, repr(float(t)), int(lab)])
    info = {"config": ws.config.name, "image_stats": ws.image_stats, "stats_source": ws.stats_source}
    (folder / "windows.json").write_text(json.dumps(info, sort_keys=True) + "\n")
    return folder


def load_windows(folder: str | Path) -> WindowSet:
    folder = Path(folder)
    if not (folder / "index.csv").is_file():
        raise FileNotFoundError(f"no window index in {folder}")
    info = json.loads((folder / "windows.json").read_text())
    arrays = {n: np.load(folder / f"{n}.npy") if (folder / f"{n}.npy").is_file() else None
              for n in ("imu", "top", "bottom")}
    with open(folder / "index.csv", newline="") as fh:
        origins = [(r["recording_id"], int(r["start_frame"]), float(r["start_s"])) for r in csv.DictReader(fh)]
    stats = info.get("image_stats")
    return WindowSet(
        **arrays,
        labels=np.load(folder / "labels.npy"),
        origins=origins,
        config=get_config(info.get("config", FULL_GLOVE.name)),
        image_stats=tuple(stats) if stats is not None else None,
        stats_source=info.get("stats_source"),
    )
