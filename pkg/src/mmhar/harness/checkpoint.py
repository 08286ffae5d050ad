"""Self-describing model checkpoints."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from mmhar.core import FULL_GLOVE, InputModality, channel_indices, parse_modality
from mmhar.errors import ModalityMismatch
from mmhar.models import HarClassifier, Presets, build_model
from mmhar.pipeline import ImuRanges, WindowSet

FORMAT = "mmhar-checkpoint/1"


@dataclass(frozen=True)
class NormMeta:
    """What inference needs to reproduce the offline preprocessing."""

    stats_source: Optional[str] = None
    image_mean: Optional[float] = None
    image_std: Optional[float] = None
    image_size: Optional[int] = None
    imu_ranges: ImuRanges = field(default_factory=ImuRanges)

    @classmethod
    def from_windows(cls, ws: WindowSet, ranges: ImuRanges = ImuRanges()) -> "NormMeta":
        mean, std = ws.image_stats if ws.image_stats is not None else (None, None)
        return cls(ws.stats_source, mean, std, ws.image_size, ranges)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NormMeta":
        return cls(**{**d, "imu_ranges": ImuRanges(**d["imu_ranges"])})


@dataclass
class Checkpoint:
    modality: InputModality
    presets: Presets
    state: dict
    norm: NormMeta = field(default_factory=NormMeta)
    seed: int = 0
    _model: Optional[HarClassifier] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_model(cls, model: HarClassifier, norm: NormMeta = NormMeta(), seed: int = 0) -> "Checkpoint":
        state = {k: v.detach().clone() for k, v in model.state_dict().items()}
        return cls(model.modality, model.presets, state, norm, seed)

    @property
    def name(self) -> str:
        return self.modality.name

    def model(self) -> HarClassifier:
        """Classifier with the stored parameters, in evaluation mode (built once)."""
        if self._model is None:
            m = build_model(self.modality, self.presets, seed=self.seed)
            m.load_state_dict(self.state)
            self._model = m.eval()
        return self._model

    def save(self, path: str | Path) -> None:
        payload = {
            "format": FORMAT,
            "modality": self.modality.name,
            "presets": self.presets.to_dict(),
            "state": self.state,
            "norm": self.norm.to_dict(),
            "seed": self.seed,
        }
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        payload = torch.load(path, map_location="cpu", weights_only=True)
        if payload.get("format") != FORMAT:
            raise ValueError(f"{path} is not a {FORMAT} file")
        return cls(
            parse_modality(payload["modality"]),
            Presets.from_dict(payload["presets"]),
            payload["state"],
            NormMeta.from_dict(payload["norm"]),
            payload["seed"],
        )


def batch_from(ws: WindowSet, idx, modality: InputModality, dtype: torch.dtype = torch.float32) -> dict:
    """Tensors a modality consumes, masking full-glove IMU columns when needed."""
    idx = np.asarray(idx, dtype=np.int64)
    out = {}
    for stream in modality.streams:
        arr = getattr(ws, stream)
        if arr is None:
            raise ModalityMismatch(f"{modality.name} needs the {stream!r} stream, which these windows lack")
        if stream == "imu" and ws.config != modality.config:
            if ws.config != FULL_GLOVE:
                raise ModalityMismatch(f"windows hold {ws.config.name} IMU columns, {modality.name} needs "
                                       f"{modality.config.name}")
            sel = arr[idx][:, :, channel_indices(modality.config)]
        else:
            sel = arr[idx]
        out[stream] = torch.as_tensor(np.ascontiguousarray(sel), dtype=dtype)
    return out
