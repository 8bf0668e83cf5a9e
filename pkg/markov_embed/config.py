"""Configuration management for markov-embed."""

from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Tolerances(BaseModel):
    """Numerical tolerances shared by every analysis step."""

    model_config = ConfigDict(frozen=True)

    row_sum: float = Field(default=1e-9, gt=0)
    entry: float = Field(default=1e-12, gt=0)  # negativity slack
    separation: float = Field(default=1e-8, gt=0)
    axis: float = Field(default=1e-10, gt=0)
    reality: float = Field(default=1e-8, gt=0)
    sector: float = Field(default=1e-9, gt=0)  # Karpelevic boundary slack
    witness: float = Field(default=1e-7, gt=0)  # per dimension, on op_norm(expm(B) - A)


class SearchConfig(BaseModel):
    """Limits for logarithm branch enumeration."""

    model_config = ConfigDict(frozen=True)

    max_offset: int = Field(default=64, ge=0)
    max_branches: int = Field(default=100_000, ge=1)


class AnalysisConfig(BaseModel):
    """Contents of the YAML configuration file."""

    tolerances: Tolerances = Tolerances()
    search: SearchConfig = SearchConfig()


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_SEARCH = SearchConfig()


class Settings(BaseSettings):
    """Process settings loaded from environment."""

    model_config = SettingsConfigDict(env_prefix="MARKOV_EMBED_")

    log_level: str = "WARNING"
    config_path: str = "./config/config.yaml"


def load_config(config_path: Optional[str]) -> AnalysisConfig:
    """Load configuration from YAML file, falling back to defaults."""
    if not config_path:
        return AnalysisConfig.model_validate(get_default_config())
    path = Path(config_path)
    if not path.exists():
        return AnalysisConfig.model_validate(get_default_config())

    with open(path, "r") as f:
        data = yaml.safe_load(f) or {}
    return AnalysisConfig.model_validate(data)


def get_default_config() -> dict:
    """Return default configuration structure."""
    return {
        "tolerances": {
            "row_sum": 1e-9,
            "entry": 1e-12,
            "separation": 1e-8,
            "axis": 1e-10,
            "reality": 1e-8,
            "sector": 1e-9,
            "witness": 1e-7,
        },
        "search": {
            "max_offset": 64,
            "max_branches": 100_000,
        },
    }


settings = Settings()
