"""Config-driven parameter sweeps, figure reproductions and the CLI."""

from .config import ConfigError, SweepConfig, load_config, parse_config
from .output import emit_outputs, read_csv
from .sweep import ResultTable, run_sweep

__all__ = ["ConfigError", "ResultTable", "SweepConfig", "emit_outputs", "load_config",
           "parse_config", "read_csv", "run_sweep"]
