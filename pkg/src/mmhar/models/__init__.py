from mmhar.models.classifiers import (
    DualTactileClassifier,
    HarClassifier,
    MotionClassifier,
    MultiModalClassifier,
    TactileClassifier,
    build_model,
    contract_batch,
    parameter_checksum,
)
from mmhar.models.configs import FusionConfig, HartConfig, Presets, VivitConfig
from mmhar.models.hart import FEATURES, LOGITS, Hart
from mmhar.models.vivit import Vivit

__all__ = [
    "DualTactileClassifier",
    "HarClassifier",
    "MotionClassifier",
    "MultiModalClassifier",
    "TactileClassifier",
    "build_model",
    "contract_batch",
    "parameter_checksum",
    "FusionConfig",
    "HartConfig",
    "Presets",
    "VivitConfig",
    "FEATURES",
    "LOGITS",
    "Hart",
    "Vivit",
]
