import os

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

env_name = os.getenv("ENV", "dev")
load_dotenv("config/.env", override=True)
load_dotenv(f"config/.env.{env_name}", override=True)


class Settings(BaseSettings):
    env: str = env_name
    log_level: str = "INFO"
    release: str = "1.0.0"

    max_workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    show_progress: bool = False

    default_lambda: float = Field(default=0.6, gt=0.5, lt=1.0)
    default_replications: int = Field(default=500, ge=2)
    default_scheme: str = "euler"
    default_seed: int = Field(default=20240611, ge=0)

    contraction_max_nodes: int = Field(default=512, ge=2)
    skip_fraction_limit: float = Field(default=0.01, ge=0.0, le=1.0)

    model_config = SettingsConfigDict(env_prefix="YULE_", extra="allow")


settings = Settings()
