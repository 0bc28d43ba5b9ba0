"""
Process Settings

Environment-driven defaults shared by the library and the CLI. Values are read once
from the process environment after loading an optional .env file.
"""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def validate_log_level(level: str) -> str:
    """Normalize and validate a logging level name."""
    normalized = level.strip().upper()
    if normalized not in LOG_LEVELS:
        raise ValueError(f"Log level must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    return normalized


class Settings(BaseModel):
    """Runtime settings sourced from KMMEANS_* environment variables"""

    log_level: str = Field(default="WARNING", description="Logging level for kmmeans loggers")
    n_jobs: int = Field(
        default=1,
        description="joblib workers used for restarts; -1 uses every core",
        examples=[1, 4, -1],
    )
    max_inits: Optional[int] = Field(
        default=None, ge=1, description="Global cap on restarts per fit"
    )
    missing_token: str = Field(default="NA", description="CSV token marking a missing cell")
    debug: bool = Field(default=False, description="Poison unobserved cells with NaN")

    @field_validator("log_level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        return validate_log_level(v)

    @field_validator("n_jobs")
    @classmethod
    def validate_jobs(cls, v: int) -> int:
        if v == 0 or v < -1:
            raise ValueError("n_jobs must be a positive integer or -1")
        return v


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in ("1", "true", "yes", "on")


def load_settings() -> Settings:
    """Build settings from the current environment."""
    max_inits = os.getenv("KMMEANS_MAX_INITS")
    return Settings(
        log_level=os.getenv("KMMEANS_LOG_LEVEL", "WARNING"),
        n_jobs=int(os.getenv("KMMEANS_N_JOBS", 1)),
        max_inits=int(max_inits) if max_inits else None,
        missing_token=os.getenv("KMMEANS_MISSING_TOKEN", "NA"),
        debug=_env_flag("KMMEANS_DEBUG"),
    )


settings = load_settings()
