import os
import pathlib
from typing import Optional

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings


class _LogConfig(BaseSettings):
    LOG_LEVEL: str = "INFO"
    ENABLE_FILE_LOG: Optional[bool] = False
    ENABLE_CONSOLE_LOG: Optional[bool] = True
    LOG_ENABLE_TRACEBACK: bool = Field(default=False)
    LOG_MAX_BYTES: int = Field(default=100_000_000, gt=0)
    LOG_BACKUP_COUNT: int = Field(default=5, ge=0)
    DEFER_LOG_MODULES: Optional[list] = ["scipy", "numpy"]
    DEFER_ADDITIONAL_LOGS: Optional[list] = []
    DEFER_LOG_LEVEL: str = "WARNING"


class _BasePathConf(BaseSettings):
    BASE_PATH: str = "code/data"


class _PathConf(BaseSettings):
    BASE_PATH: pathlib.Path = pathlib.Path(_BasePathConf().BASE_PATH)
    MODULE_NAME: str = Field("gaugeline", validation_alias="MODULE_NAME")
    LOGS_MODULE_PATH: Optional[pathlib.Path]
    REPORTS_PATH: Optional[pathlib.Path]

    @model_validator(mode="before")
    def path_merger(cls, values):
        base_path = values.get("BASE_PATH") or "code/data"
        module_name = values.get("MODULE_NAME") or "gaugeline"
        values["LOGS_MODULE_PATH"] = os.path.join(
            base_path, "logs", module_name.replace("-", "_")
        )
        values["REPORTS_PATH"] = os.path.join(base_path, "reports")
        return values


class _NumericConf(BaseSettings):
    """Numerical defaults shared by every module."""

    GRID_STEP: float = Field(default=1e-4, gt=0)
    X_MAX: float = Field(default=4.0, gt=0)
    PAIR_BUDGET: int = Field(default=1_000_000, ge=1)
    SUB_ABS_TOL: float = 1e-9
    MEMBERSHIP_TOL: float = 1e-12
    QUAD_REL_TOL: float = 1e-10
    BCP_TRUNCATION: int = Field(default=20, ge=2)
    NONLC_TRUNCATION: int = Field(default=2, ge=2)
    MAX_GRID_NODES: int = 4_000_000
    MAX_SAMPLES: int = 131_072
    MAX_ANCHORS: int = 2_000_000
    LAMBDA_MAX: float = 1e6
    BILIP_SPREAD_MAX: float = 10.0
    DIVERGENCE_EXPONENT: float = 25.0
    DIVERGENCE_RUN: int = 4
    WINDOW_FRACTION: float = Field(default=1.0, gt=0, le=1)
    SCALING_SAMPLES: int = Field(default=241, ge=8)
    ASSOUAD_RATIO_CAP: float = 100.0
    NAGATA_TILES: Optional[int] = Field(default=None, ge=3)
    NAGATA_MAX_TILES: int = 1_000_000
    HEX_K_CAP: int = 1000
    SEED: int = 0


LogConfig = _LogConfig()
PathConf = _PathConf()
NumericConf = _NumericConf()

__all__ = ["LogConfig", "PathConf", "NumericConf"]
