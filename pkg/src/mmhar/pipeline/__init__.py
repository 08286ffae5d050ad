from mmhar.pipeline.recording import AnnotationTrack, Interval, Recording
from mmhar.pipeline.transforms import (
    ImuRanges,
    align_imu_to_frames,
    align_indices,
    normalize_imu,
    preprocess_frame,
    preprocess_frames,
)
from mmhar.pipeline.windows import (
    WINDOW_LEN,
    SplitStats,
    StatsSource,
    Window,
    WindowSet,
    segment,
    segment_all,
    split_dataset,
    standardize,
)

__all__ = [
    "AnnotationTrack",
    "Interval",
    "Recording",
    "ImuRanges",
    "align_imu_to_frames",
    "align_indices",
    "normalize_imu",
    "preprocess_frame",
    "preprocess_frames",
    "WINDOW_LEN",
    "SplitStats",
    "StatsSource",
    "Window",
    "WindowSet",
    "segment",
    "segment_all",
    "split_dataset",
    "standardize",
]
