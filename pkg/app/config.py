import logging
import os
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

"""
SETTINGS
- Module constants are the defaults
- QUAD4_* environment variables override them
- One logging setup shared by the CLI and the HTTP app
"""

DEFAULT_SEED = 7
DEFAULT_PRECISION_BITS = 256
DEFAULT_ORACLE_TRIALS = 20
DEFAULT_ORACLE_DIMENSIONS = (3, 4, 5)
ORACLE_MASS_VECTORS = ("1,2,3,5", "3,1,2,1", "2,5,1,3")
GAUGE_MASS_VECTOR = "1,2,3,5"
DEFAULT_MC_SAMPLES = 10_000_000
MC_BATCH_SIZE = 1_000_000
DEFAULT_PUSHFORWARD_DEGREE = 3
DEFAULT_EIGENFORM_POINTS = 10
EIGENFORM_TOLERANCE = 1e-9
REALITY_TOLERANCE = 1e-12
GRAM_RATIO_BOUND = 1e-3
DEFAULT_DRIFT_BOUND = 1e-6
DEFAULT_OUT_DIR = "out"
REPORT_SCHEMA_VERSION = "1.0"

ENV_PREFIX = "QUAD4_"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    seed: int = DEFAULT_SEED
    precision_bits: int = Field(DEFAULT_PRECISION_BITS, ge=53)
    oracle_trials: int = Field(DEFAULT_ORACLE_TRIALS, ge=1)
    mc_samples: int = Field(DEFAULT_MC_SAMPLES, ge=1000)
    pushforward_degree: int = Field(DEFAULT_PUSHFORWARD_DEGREE, ge=1)
    eigenform_points: int = Field(DEFAULT_EIGENFORM_POINTS, ge=1)
    drift_bound: float = Field(DEFAULT_DRIFT_BOUND, gt=0)
    out_dir: Path = Path(DEFAULT_OUT_DIR)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown log level {value!r}")
        return value


def _from_environment() -> dict:
    overrides = {}
    for name in Settings.model_fields:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            overrides[name] = raw
    return overrides


@lru_cache
def get_settings() -> Settings:
    return Settings.model_validate(_from_environment())


def configure_logging(level: str | None = None) -> None:
    level = (level or get_settings().log_level).upper()
    root = logging.getLogger()
    if not any(getattr(h, "_quad4", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._quad4 = True
        root.addHandler(handler)
    root.setLevel(level)
