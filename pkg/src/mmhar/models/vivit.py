import torch
from torch import nn

from mmhar.errors import ShapeMismatch, TubeletMismatch
from mmhar.models.blocks import Encoder
from mmhar.models.configs import VivitConfig
from mmhar.models.hart import FEATURES, LOGITS


class Vivit(nn.Module):
    """Factorised video transformer over single-channel frame stacks.

    Non-overlapping t x h x w tubelets are flattened and linearly embedded.
    A spatial encoder attends within each temporal index; its mean-pooled
    outputs feed a temporal encoder whose mean is the clip feature.
    """

    def __init__(self, cfg: VivitConfig, head: bool = True):
        super().__init__()
        t, h, w = cfg.tubelet
        if cfg.frames % t or cfg.image_size % h or cfg.image_size % w:
            raise TubeletMismatch(
                f"tubelet {cfg.tubelet} does not tile {cfg.frames} frames of {cfg.image_size}px"
            )
        self.cfg = cfg
        nt, nh, nw = cfg.grid
        d = cfg.model_dim
        self.embed = nn.Linear(t * h * w, d)
        self.spatial_pos = nn.Parameter(torch.zeros(1, nh * nw, d))
        self.temporal_pos = nn.Parameter(torch.zeros(1, nt, d))
        nn.init.trunc_normal_(self.spatial_pos, std=0.02)
        nn.init.trunc_normal_(self.temporal_pos, std=0.02)
        self.drop = nn.Dropout(cfg.dropout)
        self.spatial = Encoder(d, cfg.heads, cfg.spatial_layers, cfg.mlp_dim, cfg.dropout)
        self.spatial_norm = nn.LayerNorm(d)
        self.temporal = Encoder(d, cfg.heads, cfg.temporal_layers, cfg.mlp_dim, cfg.dropout)
        self.norm = nn.LayerNorm(d)
        self.head = nn.Linear(d, cfg.classes) if head else None

    @property
    def feature_dim(self) -> int:
        return self.cfg.model_dim

    @property
    def token_count(self) -> int:
        return self.cfg.token_count

    def tubelets(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, T, S, S) -> (B, nt, nh*nw, t*h*w)."""
        cfg = self.cfg
        expected = (cfg.frames, cfg.image_size, cfg.image_size)
        if frames.ndim != 4 or tuple(frames.shape[1:]) != expected:
            raise ShapeMismatch(f"ViViT expects (batch, {expected}), got {tuple(frames.shape)}")
        b = frames.shape[0]
        t, h, w = cfg.tubelet
        nt, nh, nw = cfg.grid
        x = frames.reshape(b, nt, t, nh, h, nw, w).permute(0, 1, 3, 5, 2, 4, 6)
        return x.reshape(b, nt, nh * nw, t * h * w)

    def features(self, frames: torch.Tensor) -> torch.Tensor:
        x = self.embed(self.tubelets(frames)) + self.spatial_pos.unsqueeze(1)
        b, nt, ns, d = x.shape
        x = self.drop(x).reshape(b * nt, ns, d)
        x = self.spatial_norm(self.spatial(x)).mean(dim=1).reshape(b, nt, d)
        x = self.drop(x + self.temporal_pos)
        return self.norm(self.temporal(x)).mean(dim=1)

    def forward(self, frames: torch.Tensor, mode: str = LOGITS) -> torch.Tensor:
        f = self.features(frames)
        if mode == FEATURES:
            return f
        if self.head is None:
            raise ValueError("backbone built without a classification head")
        return self.head(f)
