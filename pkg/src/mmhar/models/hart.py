import torch
from torch import nn

from mmhar.errors import ShapeMismatch
from mmhar.models.blocks import Encoder
from mmhar.models.configs import HartConfig

FEATURES = "features"
LOGITS = "logits"


class Hart(nn.Module):
    """Temporal transformer over IMU windows.

    Per-timestep linear embedding, learned positional embedding, pre-norm
    encoder, mean-pool over time. The input width scales with the sensor
    configuration.
    """

    def __init__(self, cfg: HartConfig, head: bool = True):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Linear(cfg.input_width, cfg.model_dim)
        self.pos = nn.Parameter(torch.zeros(1, cfg.timesteps, cfg.model_dim))
        nn.init.trunc_normal_(self.pos, std=0.02)
        self.drop = nn.Dropout(cfg.dropout)
        self.encoder = Encoder(cfg.model_dim, cfg.heads, cfg.encoder_layers, cfg.mlp_dim, cfg.dropout)
        self.norm = nn.LayerNorm(cfg.model_dim)
        self.head = nn.Linear(cfg.model_dim, cfg.classes) if head else None

    @property
    def feature_dim(self) -> int:
        return self.cfg.model_dim

    def features(self, x: torch.Tensor) -> torch.Tensor:
        expected = (self.cfg.timesteps, self.cfg.input_width)
        if x.ndim != 3 or tuple(x.shape[1:]) != expected:
            raise ShapeMismatch(f"HART expects (batch, {expected[0]}, {expected[1]}), got {tuple(x.shape)}")
        h = self.drop(self.embed(x) + self.pos)
        h = self.norm(self.encoder(h))
        return h.mean(dim=1)

    def forward(self, x: torch.Tensor, mode: str = LOGITS) -> torch.Tensor:
        f = self.features(x)
        if mode == FEATURES:
            return f
        if self.head is None:
            raise ValueError("backbone built without a classification head")
        return self.head(f)
