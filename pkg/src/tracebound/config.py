"""
Configuration management for tracebound
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigurationError

# Load environment variables
load_dotenv()

DEFAULT_CONFIG_PATH = "config.json"


class RunConfig(BaseModel):
    """Settings shared by every command of a run"""
    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    precision_digits: int = Field(default=60, ge=30, description="Working precision in decimal digits")
    grid_n: int = Field(default=257, ge=33, description="Seed grid resolution per axis")
    seed: int = Field(default=0, description="Seed for every random stream")
    output_mode: str = Field(default="text", description="Report format: text or json")
    tol_kkt: float = Field(default=1e-30, gt=0, description="Stationarity residual for polished minima")
    tol_lp: float = Field(default=1e-9, ge=0, description="Moment residual tolerance for float-mode measures")
    tol_sep: Optional[float] = Field(default=None, gt=0, description="Separator noise floor (tol_lp/100 if unset)")
    gap: float = Field(default=0.01, gt=0, description="Target gap of the certified lower bound")
    budget: int = Field(default=20000, ge=1, description="Cell budget of the certified lower bound")
    max_rounds: int = Field(default=60, ge=1, description="Exchange rounds per feasibility test")
    threshold_grid_n: int = Field(default=129, ge=9, description="Minimization grid inside threshold searches")
    log_level: str = Field(default="WARNING", description="Logging level")

    @field_validator("output_mode")
    @classmethod
    def validate_output_mode(cls, v):
        v = v.lower().strip()
        if v not in ("text", "json"):
            raise ValueError("output_mode must be 'text' or 'json'")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        v = v.upper().strip()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ValueError(f"unknown log level {v}")
        return v

    @model_validator(mode="after")
    def fill_separation_tolerance(self):
        if self.tol_sep is None:
            object.__setattr__(self, "tol_sep", self.tol_lp / 100 if self.tol_lp > 0 else 1e-11)
        return self


_ENV_OVERRIDES = {
    "REPRO_PRECISION": "precision_digits",
    "TRACEBOUND_GRID_N": "grid_n",
    "TRACEBOUND_SEED": "seed",
    "LOG_LEVEL": "log_level",
}


def load_config(config_path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """
    Load run configuration from file, environment and explicit overrides

    Args:
        config_path: JSON file with RunConfig fields; defaults to
            TRACEBOUND_CONFIG_PATH or config.json (a missing default file is fine)
        overrides: Values that win over file and environment (None is ignored)

    Returns:
        Validated RunConfig

    Raises:
        FileNotFoundError: If an explicitly named file does not exist
        ConfigurationError: If the merged settings do not validate
    """
    explicit = config_path is not None
    if config_path is None:
        config_path = os.getenv("TRACEBOUND_CONFIG_PATH", DEFAULT_CONFIG_PATH)

    data: Dict[str, Any] = {}
    config_file = Path(config_path)
    if config_file.exists():
        with open(config_file, "r") as f:
            data.update(json.load(f))
    elif explicit:
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    for env_name, field in _ENV_OVERRIDES.items():
        value = os.getenv(env_name)
        if value:
            data[field] = value

    data.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


def create_sample_config(output_path: str = DEFAULT_CONFIG_PATH) -> Path:
    """Create a configuration file holding the default settings"""
    sample = RunConfig().model_dump()
    sample.pop("tol_sep")

    config_dir = Path(output_path).parent
    config_dir.mkdir(parents=True, exist_ok=True)

    with open(output_path, "w") as f:
        json.dump(sample, f, indent=2)

    print(f"Sample configuration created at: {output_path}")
    return Path(output_path)
