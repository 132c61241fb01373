from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict


load_dotenv()


class Settings(BaseSettings):
    """Process-wide numerical defaults, overridable via OBLIQUE_* env vars or .env."""

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="OBLIQUE_", extra="ignore"
    )

    APP_NAME: str = "oblique"
    LOG_LEVEL: str = "WARNING"

    QUAD_REL_TOL: float = 1e-8
    QUAD_ABS_TOL: float = 1e-12
    QUAD_MAX_PANELS: int = 400
    TAIL_MAX_DOUBLINGS: int = 40
    TAIL_DIVERGENCE_CAP: float = 1e12

    MONITOR_MAX_POINTS: int = 2000
    SWEEP_WORKERS: int = 1


settings = Settings()

if __name__ == "__main__":
    print(f"Loaded APP_NAME: {settings.APP_NAME}")
    print(f"Loaded LOG_LEVEL: {settings.LOG_LEVEL}")
