from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Run defaults from the environment. Config files and CLI flags override them."""

    model_config = SettingsConfigDict(extra="ignore")

    SIM_SEED: int = 7
    SIM_STEPS: int = 20
    OBLIGATION_TIMEOUT_ROUNDS: int = 8
    INHIBITION_THRESHOLD: float = 0.1
    REINFORCE_DELTA: float = 0.05
    DECAY_DELTA: float = 0.05
    CONFIG_DIR: str = "config"
    LOG_LEVEL: str = "WARNING"
    LOG_JSON: bool = False


@lru_cache()
def get_settings() -> Settings:
    return Settings()
