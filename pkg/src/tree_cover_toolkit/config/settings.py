import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    log_level: str = "INFO"
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    size_cap: int = Field(default=20000, ge=1)
    verify_tolerance: float = Field(default=1e-9, ge=0)
    doubling_rescale: float = Field(default=8.0, ge=8.0)
    doubling_max_rescale: float = Field(default=68.0, ge=8.0)
    planar_constant: float = Field(default=4.0, gt=0)
    planar_max_retries: int = Field(default=5, ge=1)
    hpf_padding_constant: float = Field(default=0.25, gt=0, le=0.5)
    hpf_size_factor: float = Field(default=1.0, gt=0)
    lll_max_rounds: Optional[int] = Field(default=None, ge=1)
    ramsey_attempts_per_eta: int = Field(default=3, ge=1)
    ramsey_eta_fallback: bool = True
    # 0 turns the envelope check off
    ramsey_calibration_constant: float = Field(default=7.0, ge=0)
    ramsey_calibration_slack: float = Field(default=1.5, ge=1.0)
    output_dir: Path = Path("covers")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")
        return v.upper()

    def setup_logging(self) -> None:
        """Configure logging based on settings."""
        logging.basicConfig(
            level=getattr(logging, self.log_level),
            format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )

    def resolved(self) -> dict:
        """Settings that shape results, as embedded in every report."""
        return self.model_dump(mode="json", exclude={"threads", "output_dir", "log_level"})


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get settings instance (singleton pattern)."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


settings = get_settings()
