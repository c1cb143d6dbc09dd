"""Process-level settings read from SIM_* environment variables or a .env file."""

from __future__ import annotations

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SimSettings(BaseSettings):
	workers: Optional[int] = Field(default=None, ge=1, description="Overrides run.workers from the configuration.")
	otlp_endpoint: Optional[str] = Field(default=None, description="OTLP gRPC collector, e.g. http://localhost:4317.")
	log_level: str = Field(default="INFO")
	service_name: str = Field(default="aerial-lte-sim")

	model_config = SettingsConfigDict(env_prefix="SIM_", env_file=".env", extra="ignore")
