"""Per-sample transforms shared by the offline pipeline and the stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from mmhar.core import CHANNELS_PER_SENSOR, FULL_WIDTH
from mmhar.errors import AlignmentGap
from mmhar.pipeline.recording import Recording

TIE_EPS = 1e-9  # seconds; distances closer than this count as ties


def align_indices(imu_t: np.ndarray, frame_t: np.ndarray, max_gap: float) -> np.ndarray:
    """Index of the nearest IMU sample for each frame timestamp.

    Ties go to the earlier sample. Raises AlignmentGap when some frame has no
    IMU sample within ``max_gap`` seconds.
    """
    imu_t = np.asarray(imu_t, dtype=np.float64)
    frame_t = np.asarray(frame_t, dtype=np.float64)
    if imu_t.size == 0 or frame_t.size == 0:
        raise ValueError("alignment needs non-empty IMU and frame streams")
    right = np.searchsorted(imu_t, frame_t, side="left")
    left = np.clip(right - 1, 0, imu_t.size - 1)
    right = np.clip(right, 0, imu_t.size - 1)
    d_left = np.abs(frame_t - imu_t[left])
    d_right = np.abs(imu_t[right] - frame_t)
    idx = np.where(d_left <= d_right + TIE_EPS, left, right)
    dist = np.abs(imu_t[idx] - frame_t)
    bad = dist > max_gap + TIE_EPS
    if np.any(bad):
        j = int(np.argmax(bad))
        raise AlignmentGap(
            f"frame at t={frame_t[j]:.4f}s is {dist[j]:.4f}s from the nearest IMU sample (limit {max_gap:.4f}s)"
        )
    return idx


def imu_period(imu_t: np.ndarray) -> float:
    if len(imu_t) < 2:
        raise ValueError("need at least two IMU samples to estimate the period")
    return float(np.median(np.diff(imu_t)))


def align_imu_to_frames(recording: Recording, max_gap: Optional[float] = None) -> np.ndarray:
    """One IMU row per top-camera frame, chosen by nearest timestamp."""
    if max_gap is None:
        max_gap = imu_period(recording.imu_t)
    idx = align_indices(recording.imu_t, recording.top_t, max_gap)
    return recording.imu[idx]


@dataclass(frozen=True)
class ImuRanges:
    """Full-scale ranges: accelerometer in g, gyroscope in deg/s, magnetometer in uT."""

    accel: float = 16.0
    gyro: float = 2000.0
    mag: float = 4900.0

    def __post_init__(self):
        if min(self.accel, self.gyro, self.mag) <= 0:
            raise ValueError("full-scale ranges must be positive")

    def scale_vector(self) -> np.ndarray:
        per_sensor = np.repeat([self.accel, self.gyro, self.mag], 3)
        return np.tile(per_sensor, FULL_WIDTH // CHANNELS_PER_SENSOR)


def normalize_imu(values: np.ndarray, ranges: ImuRanges = ImuRanges()) -> np.ndarray:
    """Divide by full scale and clamp to [-1, 1].

    Accepts ``(..., 72)`` rows or a single ``(8, 9)`` sensor-major block.
    """
    values = np.asarray(values, dtype=np.float64)
    scale = ranges.scale_vector()
    if values.shape[-2:] == (FULL_WIDTH // CHANNELS_PER_SENSOR, CHANNELS_PER_SENSOR):
        scale = scale.reshape(values.shape[-2:])
    return np.clip(values / scale, -1.0, 1.0)


LUMA = np.array([0.299, 0.587, 0.114])


def _axis_weights(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    w = (src - lo).astype(np.float32)
    return lo, hi, w


def resize_bilinear(img: np.ndarray, size: int) -> np.ndarray:
    """Half-pixel-centred bilinear resize of a 2-D float image to size x size."""
    h, w = img.shape
    y0, y1, wy = _axis_weights(h, size)
    x0, x1, wx = _axis_weights(w, size)
    rows0 = img[y0]
    rows1 = img[y1]
    top = rows0[:, x0] * (1 - wx) + rows0[:, x1] * wx
    bot = rows1[:, x0] * (1 - wx) + rows1[:, x1] * wx
    return top * (1 - wy)[:, None] + bot * wy[:, None]


def preprocess_frame(image: np.ndarray, target: int) -> np.ndarray:
    """Centre-crop to square, convert to grayscale, resize, scale to [0, 1]."""
    image = np.asarray(image)
    if image.ndim not in (2, 3) or (image.ndim == 3 and image.shape[2] != 3):
        raise ValueError(f"expected HxW or HxWx3 image, got shape {image.shape}")
    h, w = image.shape[:2]
    if h < 2 or w < 2:
        raise ValueError(f"degenerate image of shape {image.shape}")
    if target < 8:
        raise ValueError("target size must be at least 8")
    side = min(h, w)
    top, left = (h - side) // 2, (w - side) // 2
    image = image[top:top + side, left:left + side]
    if image.ndim == 3:
        gray = (image.astype(np.float64) @ LUMA).astype(np.float32)
    else:
        gray = image.astype(np.float32)
    gray = gray / np.float32(255.0)
    if side == target:
        return gray
    return resize_bilinear(gray, target).astype(np.float32)


def preprocess_frames(frames: np.ndarray, target: int) -> np.ndarray:
    """Frame-by-frame preprocessing of a stack; identical to calling preprocess_frame in a loop."""
    out = np.empty((len(frames), target, target), dtype=np.float32)
    for i, f in enumerate(frames):
        out[i] = preprocess_frame(f, target)
    return out
