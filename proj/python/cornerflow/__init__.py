"""Subsonic potential flow around corners."""

from ._core import ConfigError, GasModel, normalize_config, parse_number, reference, run

__all__ = ["ConfigError", "GasModel", "normalize_config", "parse_number", "reference", "run"]
