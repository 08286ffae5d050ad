"""Motion, tactile and multi-modal human activity recognition at desk scale."""

__version__ = "0.1.0"
