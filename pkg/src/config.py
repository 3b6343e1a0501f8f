"""
Configuration loading for relcut.

Values come from, in increasing precedence: built-in defaults, the JSON
config file, environment variables, and CLI overrides.
"""

import dataclasses
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.errors import InfeasibleParameterError
from src.models import OracleLimits

logger = logging.getLogger(__name__)


def load_config(config_filename: str = "../config/config.json") -> Dict[str, Any]:
    """Loads configuration from a JSON file, relative to this module."""
    base_dir = Path(__file__).resolve().parent
    config_path = base_dir / config_filename

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        logger.warning("Config file not found at %s. Using defaults.", config_path)
        return {}


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """Tuning constants for the estimation pipeline."""

    # pylint: disable=too-many-instance-attributes

    seed: int = 20140105
    K: float = 2.5  # pylint: disable=invalid-name
    phi: float = 4.0
    lam: float = 64.0
    c_pipe: float = 1.0
    c_enum: float = 1.0
    c_mc: float = 64.0
    mc_target_factor: float = 16.0
    hash_phi: float = 3.0
    r_max: int = 30
    median_of_means_groups: int = 0
    threads: int = 1
    grid_step: float = 0.01
    force_branch: Optional[str] = None
    oracle: OracleLimits = OracleLimits()

    def __post_init__(self) -> None:
        if self.K <= 2:
            raise InfeasibleParameterError(f"K must exceed 2, got {self.K}")
        if self.phi < 1 or self.lam < 1:
            raise InfeasibleParameterError("phi and lambda must be at least 1")
        if min(self.c_pipe, self.c_enum, self.c_mc, self.mc_target_factor) <= 0:
            raise InfeasibleParameterError(
                "c_pipe, c_enum, c_mc and mc_target_factor must be positive"
            )
        if not 1 <= self.r_max <= 60:
            raise InfeasibleParameterError(f"r_max must lie in [1, 60], got {self.r_max}")
        if not 0 < self.grid_step < 1:
            raise InfeasibleParameterError(f"grid_step must lie in (0, 1), got {self.grid_step}")
        if self.median_of_means_groups < 0:
            raise InfeasibleParameterError("median_of_means_groups must be non-negative")
        if self.threads < 1:
            raise InfeasibleParameterError(f"threads must be at least 1, got {self.threads}")
        if self.force_branch not in (None, "mc", "cuts"):
            raise InfeasibleParameterError(f"unknown branch {self.force_branch!r}")

    @classmethod
    def from_sources(
        cls,
        file_config: Optional[Mapping[str, Any]] = None,
        environ: Optional[Mapping[str, str]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "PipelineConfig":
        """Merges file values, the RELCUT_THREADS variable and overrides."""
        values: Dict[str, Any] = {}
        file_config = dict(file_config or {})

        oracle_cfg = file_config.pop("oracle", {}) or {}
        if "lambda" in file_config:
            file_config["lam"] = file_config.pop("lambda")
        known = {f.name for f in dataclasses.fields(cls)}
        for key, value in file_config.items():
            if key in known:
                values[key] = value
            else:
                logger.warning("Ignoring unknown config key %r", key)
        if oracle_cfg:
            limit_names = {f.name for f in dataclasses.fields(OracleLimits)}
            unknown = sorted(set(oracle_cfg) - limit_names)
            if unknown:
                raise InfeasibleParameterError(f"unknown oracle limits: {', '.join(unknown)}")
            values["oracle"] = OracleLimits(**oracle_cfg)

        environ = os.environ if environ is None else environ
        raw_threads = environ.get("RELCUT_THREADS", "").strip()
        if raw_threads:
            try:
                values["threads"] = int(raw_threads)
            except ValueError as e:
                raise InfeasibleParameterError(
                    f"RELCUT_THREADS must be an integer, got {raw_threads!r}"
                ) from e

        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value

        return cls(**values)
