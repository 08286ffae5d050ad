"""Architecture configurations and the paper / desk / mini presets."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from mmhar.core import NUM_CLASSES


@dataclass(frozen=True)
class HartConfig:
    input_width: int = 72
    timesteps: int = 90
    model_dim: int = 64
    heads: int = 4
    encoder_layers: int = 4
    mlp_dim: int = 128
    dropout: float = 0.1
    classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.model_dim % self.heads:
            raise ValueError("model_dim must be divisible by heads")


@dataclass(frozen=True)
class VivitConfig:
    image_size: int = 224
    frames: int = 90
    tubelet: tuple[int, int, int] = (10, 16, 16)
    model_dim: int = 96
    heads: int = 4
    spatial_layers: int = 4
    temporal_layers: int = 2
    mlp_dim: int = 192
    dropout: float = 0.1
    classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.model_dim % self.heads:
            raise ValueError("model_dim must be divisible by heads")
        object.__setattr__(self, "tubelet", tuple(self.tubelet))

    @property
    def grid(self) -> tuple[int, int, int]:
        t, h, w = self.tubelet
        return self.frames // t, self.image_size // h, self.image_size // w

    @property
    def token_count(self) -> int:
        nt, nh, nw = self.grid
        return nt * nh * nw


@dataclass(frozen=True)
class FusionConfig:
    hidden: int = 128
    dropout: float = 0.1
    classes: int = NUM_CLASSES


@dataclass(frozen=True)
class Presets:
    name: str = "paper"
    hart: HartConfig = field(default_factory=HartConfig)
    vivit: VivitConfig = field(default_factory=VivitConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)

    @classmethod
    def paper(cls) -> "Presets":
        return cls()

    @classmethod
    def desk(cls) -> "Presets":
        return cls(
            "desk",
            HartConfig(model_dim=32, heads=4, encoder_layers=2, mlp_dim=64),
            VivitConfig(image_size=56, tubelet=(10, 8, 8), model_dim=32, heads=4,
                        spatial_layers=1, temporal_layers=1, mlp_dim=64),
            FusionConfig(hidden=64),
        )

    @classmethod
    def mini(cls) -> "Presets":
        """Miniature double-precision-friendly preset for gradient checks."""
        return cls(
            "mini",
            HartConfig(timesteps=10, model_dim=8, heads=2, encoder_layers=1, mlp_dim=16, dropout=0.0),
            VivitConfig(image_size=16, frames=10, tubelet=(5, 4, 4), model_dim=8, heads=2,
                        spatial_layers=1, temporal_layers=1, mlp_dim=16, dropout=0.0),
            FusionConfig(hidden=16, dropout=0.0),
        )

    @classmethod
    def named(cls, name: str) -> "Presets":
        try:
            return {"paper": cls.paper, "desk": cls.desk, "mini": cls.mini}[name]()
        except KeyError:
            raise ValueError(f"unknown preset {name!r}") from None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Presets":
        return cls(
            d["name"],
            HartConfig(**d["hart"]),
            VivitConfig(**{**d["vivit"], "tubelet": tuple(d["vivit"]["tubelet"])}),
            FusionConfig(**d["fusion"]),
        )
