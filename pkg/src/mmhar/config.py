"""Declarative run configuration loaded from YAML."""

from __future__ import annotations

import dataclasses
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from mmhar.core import InputModality, resolve_modalities
from mmhar.errors import ConfigError
from mmhar.harness.training import TrainSpec
from mmhar.models import Presets
from mmhar.pipeline import ImuRanges, StatsSource
from mmhar.synthgen import GenParams


@dataclass
class GenSection:
    participants: int = 1
    segment_duration: float = 12.0
    continuous_sequences: int = 1
    action_duration: float = 4.0
    pause_duration: float = 2.0
    image_size: Optional[int] = None  # None: 56 for desk, 224 for paper
    imu_rate: float = 40.0
    camera_rate: float = 30.0
    marker_grid: list = field(default_factory=lambda: [12, 8])
    noise_std: float = 0.02
    clock_jitter_std: float = 0.002
    relaxation: bool = True
    relaxation_tau: float = 0.5
    bottom_attenuation: float = 0.7
    write_windows: bool = False


@dataclass
class TrainSection:
    learning_rate: float = 1e-3
    batch_size: int = 8
    max_epochs: int = 40
    patience: int = 8
    weight_decay: float = 0.0
    target_loss: Optional[float] = None
    fractions: list = field(default_factory=lambda: [0.6, 0.2, 0.2])
    stats_source: str = StatsSource.PER_SPLIT.value
    accel_range: float = 16.0
    gyro_range: float = 2000.0
    mag_range: float = 4900.0


@dataclass
class BenchSection:
    repetitions: int = 30
    warmup: int = 3
    threads: int = 1


@dataclass
class StreamSection:
    models: list = field(default_factory=lambda: ["MBC-8FG", "TBC-2", "MMC-8FG"])
    capacity: int = 180


@dataclass
class RunConfig:
    seed: int = 0
    preset: str = "desk"
    dataset_dir: str = "data"
    run_dir: str = "runs/default"
    modality: str = "all17"
    gen: GenSection = field(default_factory=GenSection)
    train: TrainSection = field(default_factory=TrainSection)
    bench: BenchSection = field(default_factory=BenchSection)
    stream: StreamSection = field(default_factory=StreamSection)

    def __post_init__(self):
        if self.preset not in ("desk", "paper"):
            raise ConfigError(f"preset must be 'desk' or 'paper', got {self.preset!r}")
        try:
            StatsSource(self.train.stats_source)
            resolve_modalities(self.modality)
            for m in self.stream.models:
                resolve_modalities(m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if len(self.train.fractions) != 3 or abs(sum(self.train.fractions) - 1.0) > 1e-9:
            raise ConfigError("train.fractions must be three numbers summing to 1")
        if self.gen.participants < 1 or self.gen.continuous_sequences < 0:
            raise ConfigError("gen.participants must be >= 1 and gen.continuous_sequences >= 0")

    # Derived objects

    @property
    def image_size(self) -> int:
        if self.gen.image_size is not None:
            return int(self.gen.image_size)
        return 56 if self.preset == "desk" else 224

    def gen_params(self) -> GenParams:
        g = self.gen
        try:
            return GenParams(
                seed=self.seed, imu_rate=g.imu_rate, camera_rate=g.camera_rate, image_size=self.image_size,
                marker_grid=tuple(g.marker_grid), noise_std=g.noise_std, clock_jitter_std=g.clock_jitter_std,
                segment_duration=g.segment_duration, relaxation=g.relaxation, relaxation_tau=g.relaxation_tau,
                bottom_attenuation=g.bottom_attenuation,
            )
        except ValueError as exc:
            raise ConfigError(f"gen: {exc}") from exc

    def train_spec(self) -> TrainSpec:
        t = self.train
        try:
            return TrainSpec(learning_rate=t.learning_rate, batch_size=t.batch_size, max_epochs=t.max_epochs,
                             patience=t.patience, seed=self.seed, weight_decay=t.weight_decay,
                             target_loss=t.target_loss)
        except ValueError as exc:
            raise ConfigError(f"train: {exc}") from exc

    def imu_ranges(self) -> ImuRanges:
        return ImuRanges(self.train.accel_range, self.train.gyro_range, self.train.mag_range)

    def presets(self) -> Presets:
        presets = Presets.named(self.preset)
        if self.image_size != presets.vivit.image_size:
            presets = dataclasses.replace(presets, vivit=dataclasses.replace(presets.vivit, image_size=self.image_size))
        return presets

    def modalities(self) -> list[InputModality]:
        return resolve_modalities(self.modality)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))


def _build(cls, data, prefix: str = ""):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config section {prefix or '<root>'} must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown config key '{prefix}{unknown[0]}'")
    kwargs = {}
    for name, value in data.items():
        sub = _SECTIONS.get(name) if cls is RunConfig else None
        kwargs[name] = _build(sub, value, f"{name}.") if sub else value
    return cls(**kwargs)


_SECTIONS = {"gen": GenSection, "train": TrainSection, "bench": BenchSection, "stream": StreamSection}


def config_from_dict(data: Optional[dict]) -> RunConfig:
    try:
        return _build(RunConfig, data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str | Path] = None, **overrides) -> RunConfig:
    """Read a YAML config (or defaults) and apply non-None top-level overrides."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = yaml.safe_load(p.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from exc
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data)
