"""The 17 input-configuration classifiers.

Every classifier takes a batch dict with some of ``imu`` ``(B, T, F)``,
``top`` and ``bottom`` ``(B, T, S, S)`` and returns ``(B, classes)`` logits.
"""

from __future__ import annotations

import hashlib
from dataclasses import replace

import numpy as np
import torch
from torch import nn

from mmhar.core import MBC, MMC, TBC1_BOT, TBC1_TOP, TBC2, InputModality, feature_width, parse_modality
from mmhar.errors import ShapeMismatch
from mmhar.models.blocks import FusionHead
from mmhar.models.configs import Presets
from mmhar.models.hart import FEATURES, Hart
from mmhar.models.vivit import Vivit


def _require(batch: dict, key: str) -> torch.Tensor:
    if key not in batch or batch[key] is None:
        raise ShapeMismatch(f"batch is missing the {key!r} stream")
    return batch[key]


class HarClassifier(nn.Module):
    modality: InputModality

    @property
    def streams(self) -> tuple[str, ...]:
        return self.modality.streams


class MotionClassifier(HarClassifier):
    def __init__(self, modality: InputModality, presets: Presets):
        super().__init__()
        self.modality = modality
        self.hart = Hart(replace(presets.hart, input_width=feature_width(modality.config)))

    def forward(self, batch: dict) -> torch.Tensor:
        return self.hart(_require(batch, "imu"))


class TactileClassifier(HarClassifier):
    """Single camera stream, one backbone with its own linear head."""

    def __init__(self, modality: InputModality, presets: Presets):
        super().__init__()
        self.modality = modality
        self.stream = "top" if modality.family == TBC1_TOP else "bottom"
        self.vivit = Vivit(presets.vivit)

    def forward(self, batch: dict) -> torch.Tensor:
        return self.vivit(_require(batch, self.stream))


class DualTactileClassifier(HarClassifier):
    """Two independent backbones, concatenated features, fully connected head."""

    def __init__(self, modality: InputModality, presets: Presets):
        super().__init__()
        self.modality = modality
        self.top = Vivit(presets.vivit, head=False)
        self.bottom = Vivit(presets.vivit, head=False)
        f = presets.fusion
        self.fusion = FusionHead(2 * presets.vivit.model_dim, f.hidden, f.classes, f.dropout)

    def forward(self, batch: dict) -> torch.Tensor:
        feats = [self.top(_require(batch, "top"), FEATURES), self.bottom(_require(batch, "bottom"), FEATURES)]
        return self.fusion(feats)


class MultiModalClassifier(HarClassifier):
    """Late fusion of one IMU branch and two camera branches."""

    def __init__(self, modality: InputModality, presets: Presets):
        super().__init__()
        self.modality = modality
        self.hart = Hart(replace(presets.hart, input_width=feature_width(modality.config)), head=False)
        self.top = Vivit(presets.vivit, head=False)
        self.bottom = Vivit(presets.vivit, head=False)
        f = presets.fusion
        width = presets.hart.model_dim + 2 * presets.vivit.model_dim
        self.fusion = FusionHead(width, f.hidden, f.classes, f.dropout)

    def forward(self, batch: dict) -> torch.Tensor:
        feats = [
            self.hart(_require(batch, "imu"), FEATURES),
            self.top(_require(batch, "top"), FEATURES),
            self.bottom(_require(batch, "bottom"), FEATURES),
        ]
        return self.fusion(feats)


_FAMILIES = {
    MBC: MotionClassifier,
    TBC1_TOP: TactileClassifier,
    TBC1_BOT: TactileClassifier,
    TBC2: DualTactileClassifier,
    MMC: MultiModalClassifier,
}


def build_model(modality: InputModality | str, presets: Presets | None = None, seed: int = 0) -> HarClassifier:
    """Construct one classifier with seeded, reproducible initialisation."""
    modality = parse_modality(modality)
    presets = presets or Presets.desk()
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = _FAMILIES[modality.family](modality, presets)
    model.presets = presets
    return model


def parameter_checksum(model: nn.Module) -> str:
    h = hashlib.sha256()
    for name, p in model.state_dict().items():
        h.update(name.encode())
        h.update(np.ascontiguousarray(p.detach().cpu().numpy()).tobytes())
    return h.hexdigest()


def contract_batch(model: HarClassifier, batch_size: int = 1, seed: int = 0,
                   dtype: torch.dtype = torch.float32) -> dict:
    """Random inputs of the shapes a classifier expects."""
    p = model.presets
    g = torch.Generator().manual_seed(seed)
    out = {}
    if model.modality.uses_imu:
        out["imu"] = torch.randn(batch_size, p.hart.timesteps, feature_width(model.modality.config),
                                 generator=g, dtype=dtype)
    v = p.vivit
    for stream in ("top", "bottom"):
        if stream in model.streams:
            out[stream] = torch.randn(batch_size, v.frames, v.image_size, v.image_size, generator=g, dtype=dtype)
    return out
