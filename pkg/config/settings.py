"""
Configuration settings for the Grothendieck lower-bound laboratory.

This module provides type-safe configuration management using Pydantic settings.
All environment variables are validated and provide sensible defaults.
"""

from pathlib import Path
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericsSettings(BaseSettings):
    """Special-function, quadrature and root-finding configuration."""

    # Gaussian tail beyond |x| = 9 is below 1e-18; stands in for +-infinity.
    truncation: float = 9.0
    quad_tolerance: float = 1e-12
    quad_limit: int = 200
    root_tolerance: float = 1e-13
    max_hermite_degree: int = 64

    model_config = SettingsConfigDict(env_prefix="GLAB_NUMERICS_", env_file=".env", extra="ignore")

    @field_validator("truncation")
    @classmethod
    def validate_truncation(cls, v):
        if v < 8.0:
            raise ValueError("truncation must be at least 8 (Gaussian tail must be negligible)")
        return v

    @field_validator("quad_tolerance", "root_tolerance")
    @classmethod
    def validate_tolerance(cls, v):
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("max_hermite_degree")
    @classmethod
    def validate_degree(cls, v):
        if not 0 <= v <= 64:
            raise ValueError("max_hermite_degree must lie in [0, 64]")
        return v


class SearchSettings(BaseSettings):
    """Breakpoint search defaults."""

    max_breakpoints: int = 6
    restarts: int = 40
    step_tolerance: float = 1e-10
    value_tolerance: float = 1e-13
    max_sweeps: int = 200
    grid_points: int = 12
    workers: int = 1

    model_config = SettingsConfigDict(env_prefix="GLAB_SEARCH_", env_file=".env", extra="ignore")

    @field_validator("restarts", "max_breakpoints", "max_sweeps", "workers")
    @classmethod
    def validate_positive_int(cls, v):
        if v < 1:
            raise ValueError("search counts must be at least 1")
        return v

    @field_validator("step_tolerance", "value_tolerance")
    @classmethod
    def validate_tolerance(cls, v):
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v


class MonteCarloSettings(BaseSettings):
    """Monte Carlo sampling defaults."""

    samples: int = 100_000
    chunk_size: int = 20_000

    model_config = SettingsConfigDict(env_prefix="GLAB_MC_", env_file=".env", extra="ignore")


class DiscretizationSettings(BaseSettings):
    """Quadrature-discretized game defaults."""

    m: int = 20
    degree_cap: int = 12
    rank: int = 8
    iters: int = 200
    enumeration_chunk: int = 65_536

    model_config = SettingsConfigDict(
        env_prefix="GLAB_DISCRETE_", env_file=".env", extra="ignore"
    )


class MonitoringSettings(BaseSettings):
    """Logging configuration."""

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "WARNING"
    log_dir: Optional[Path] = None
    debug: bool = False

    model_config = SettingsConfigDict(env_prefix="GLAB_", env_file=".env", extra="ignore")


class LabSettings(BaseSettings):
    """Main application settings."""

    seed: int = 20240229
    environment: Literal["development", "ci", "production"] = "development"

    # Sub-settings
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    search: SearchSettings = Field(default_factory=SearchSettings)
    monte_carlo: MonteCarloSettings = Field(default_factory=MonteCarloSettings)
    discretization: DiscretizationSettings = Field(default_factory=DiscretizationSettings)
    monitoring: MonitoringSettings = Field(default_factory=MonitoringSettings)

    model_config = SettingsConfigDict(
        env_prefix="GLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",  # Ignore extra fields from environment
    )

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v


# Global settings instance
settings = LabSettings()


def get_settings() -> LabSettings:
    """Get the application settings instance."""
    return settings


def reload_settings() -> LabSettings:
    """Re-read the environment (used after GLAB_* variables change)."""
    global settings
    settings = LabSettings()
    return settings
