"""Action labels, sensor identities, glove configurations and input modalities."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional


class ActionLabel(IntEnum):
    PINCHING = 0
    PULLING = 1
    PUSHING = 2
    RUBBING = 3
    PATTING = 4
    TAPPING = 5
    SCRATCHING = 6
    LINGERING = 7
    MASSAGING = 8
    SQUEEZING = 9
    TREMBLING = 10
    SHAKING = 11
    STROKING = 12
    POKING = 13
    IDLE = 14

    @property
    def title(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, text: str) -> "ActionLabel":
        return cls[text.strip().upper()]


NUM_CLASSES = len(ActionLabel)


def index_of(label: ActionLabel) -> int:
    return int(label)


def label_from_index(index: int) -> ActionLabel:
    return ActionLabel(int(index))


class Area(Enum):
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"
    NONE = "None"


class Level(Enum):
    """Ordinal level used for both pressure and frequency."""

    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    NONE = "None"


@dataclass(frozen=True)
class ActionProfile:
    label: ActionLabel
    area: Area
    pressure: Level
    frequency: Level

    @property
    def has_contact(self) -> bool:
        return self.area is not Area.NONE


def _p(label, area, pressure, frequency):
    return label, ActionProfile(label, Area[area], Level[pressure], Level[frequency])


PROFILES: dict[ActionLabel, ActionProfile] = dict(
    [
        _p(ActionLabel.PINCHING, "SMALL", "HIGH", "MEDIUM"),
        _p(ActionLabel.PULLING, "LARGE", "HIGH", "LOW"),
        _p(ActionLabel.PUSHING, "LARGE", "HIGH", "LOW"),
        _p(ActionLabel.RUBBING, "MEDIUM", "MEDIUM", "HIGH"),
        _p(ActionLabel.PATTING, "LARGE", "MEDIUM", "HIGH"),
        _p(ActionLabel.TAPPING, "MEDIUM", "MEDIUM", "HIGH"),
        _p(ActionLabel.SCRATCHING, "SMALL", "LOW", "HIGH"),
        _p(ActionLabel.LINGERING, "MEDIUM", "LOW", "LOW"),
        _p(ActionLabel.MASSAGING, "LARGE", "MEDIUM", "MEDIUM"),
        _p(ActionLabel.SQUEEZING, "LARGE", "HIGH", "LOW"),
        _p(ActionLabel.TREMBLING, "SMALL", "LOW", "MEDIUM"),
        _p(ActionLabel.SHAKING, "LARGE", "MEDIUM", "HIGH"),
        _p(ActionLabel.STROKING, "MEDIUM", "LOW", "MEDIUM"),
        _p(ActionLabel.POKING, "SMALL", "MEDIUM", "MEDIUM"),
        _p(ActionLabel.IDLE, "NONE", "NONE", "NONE"),
    ]
)


class SensorId(Enum):
    A = "thumb proximal"
    B = "thumb distal"
    C = "index proximal"
    D = "index intermediate"
    E = "middle proximal"
    F = "middle intermediate"
    G = "hand back"
    H = "wrist"

    @property
    def placement(self) -> str:
        return self.value

    @property
    def position(self) -> int:
        return _SENSOR_ORDER.index(self)


_SENSOR_ORDER = list(SensorId)

CHANNEL_KINDS = ("acc", "gyro", "mag")
AXES = ("x", "y", "z")
CHANNELS_PER_SENSOR = len(CHANNEL_KINDS) * len(AXES)
FULL_WIDTH = len(_SENSOR_ORDER) * CHANNELS_PER_SENSOR


def channel_names() -> list[str]:
    """Column names of the 72-wide full-glove matrix, e.g. ``B_acc_x``."""
    return [
        f"{s.name}_{kind}_{axis}"
        for s in _SENSOR_ORDER
        for kind in CHANNEL_KINDS
        for axis in AXES
    ]


@dataclass(frozen=True)
class SensorConfig:
    name: str
    sensors: tuple[SensorId, ...]

    def __str__(self) -> str:
        return self.name


def _cfg(name: str, letters: str) -> SensorConfig:
    return SensorConfig(name, tuple(SensorId[c] for c in letters))


SENSOR_CONFIGS: dict[str, SensorConfig] = {
    c.name: c
    for c in (
        _cfg("8FG", "ABCDEFGH"),
        _cfg("4CPW", "BDFH"),
        _cfg("4CPB", "BDFG"),
        _cfg("3CP", "BDF"),
        _cfg("2TI", "BD"),
        _cfg("3TIB", "BDG"),
        _cfg("2WB", "GH"),
    )
}
FULL_GLOVE = SENSOR_CONFIGS["8FG"]


def get_config(name: str | SensorConfig) -> SensorConfig:
    if isinstance(name, SensorConfig):
        return name
    try:
        return SENSOR_CONFIGS[name]
    except KeyError:
        raise ValueError(f"unknown sensor configuration {name!r}") from None


def feature_width(config: SensorConfig) -> int:
    return CHANNELS_PER_SENSOR * len(config.sensors)


def channel_indices(config: SensorConfig) -> list[int]:
    """Columns of the full-glove matrix retained by ``config``, ascending."""
    positions = sorted(s.position for s in config.sensors)
    return [p * CHANNELS_PER_SENSOR + k for p in positions for k in range(CHANNELS_PER_SENSOR)]


# Modality families. TBC variants carry no sensor configuration.
MBC = "MBC"
TBC1_TOP = "TBC1Top"
TBC1_BOT = "TBC1Bot"
TBC2 = "TBC2"
MMC = "MMC"

_FAMILY_NAMES = {TBC1_TOP: "TBC-1top", TBC1_BOT: "TBC-1bot", TBC2: "TBC-2"}


@dataclass(frozen=True)
class InputModality:
    family: str
    config: Optional[SensorConfig] = None

    def __post_init__(self):
        if self.family in (MBC, MMC):
            if self.config is None:
                raise ValueError(f"{self.family} requires a sensor configuration")
        elif self.family in _FAMILY_NAMES:
            if self.config is not None:
                raise ValueError(f"{self.family} takes no sensor configuration")
        else:
            raise ValueError(f"unknown modality family {self.family!r}")

    @property
    def name(self) -> str:
        if self.config is not None:
            return f"{self.family}-{self.config.name}"
        return _FAMILY_NAMES[self.family]

    @property
    def uses_imu(self) -> bool:
        return self.family in (MBC, MMC)

    @property
    def uses_top(self) -> bool:
        return self.family in (TBC1_TOP, TBC2, MMC)

    @property
    def uses_bottom(self) -> bool:
        return self.family in (TBC1_BOT, TBC2, MMC)

    @property
    def streams(self) -> tuple[str, ...]:
        out = []
        if self.uses_imu:
            out.append("imu")
        if self.uses_top:
            out.append("top")
        if self.uses_bottom:
            out.append("bottom")
        return tuple(out)

    def __str__(self) -> str:
        return self.name


def parse_modality(name: str | InputModality) -> InputModality:
    if isinstance(name, InputModality):
        return name
    for family, pretty in _FAMILY_NAMES.items():
        if name.lower() == pretty.lower():
            return InputModality(family)
    family, _, cfg = name.partition("-")
    if family.upper() in (MBC, MMC) and cfg:
        return InputModality(family.upper(), get_config(cfg.upper()))
    raise ValueError(f"unknown modality {name!r}")


def all_modalities() -> list[InputModality]:
    """The 17 evaluated input configurations, grouped MBC, TBC, MMC."""
    mods = [InputModality(MBC, c) for c in SENSOR_CONFIGS.values()]
    mods += [InputModality(TBC1_TOP), InputModality(TBC1_BOT), InputModality(TBC2)]
    mods += [InputModality(MMC, c) for c in SENSOR_CONFIGS.values()]
    return mods


def resolve_modalities(spec: str | list[str]) -> list[InputModality]:
    """Parse a modality selection; ``"all17"`` expands to every configuration."""
    if isinstance(spec, str):
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    out: list[InputModality] = []
    for item in spec:
        if item.lower() == "all17":
            out.extend(all_modalities())
        else:
            out.append(parse_modality(item))
    return out
