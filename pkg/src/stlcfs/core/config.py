# stlcfs/src/stlcfs/core/config.py

try:
    # Try to import from pydantic-settings (Pydantic v2)
    from pydantic_settings import BaseSettings
    from pydantic import Field
    PYDANTIC_V2 = True
except ImportError:
    # Fall back to Pydantic v1
    from pydantic import BaseSettings, Field
    PYDANTIC_V2 = False

import logging

LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class Settings(BaseSettings):
    # STL_CFS_LOG controls verbosity of every command
    log: str = Field(default="info")
    verify_tol: float = Field(default=1e-6)
    solver_max_iters: int = Field(default=50_000)
    scenario_dir: str = Field(default="scenarios")

    def log_level(self) -> int:
        """
        Map the configured verbosity name to a logging level.
        Unknown names fall back to INFO.
        """
        return LOG_LEVELS.get(self.log.strip().lower(), logging.INFO)

    # Handle config for both Pydantic v1 and v2
    if PYDANTIC_V2:
        model_config = {
            "env_file": ".env",
            "env_file_encoding": "utf-8",
            "env_prefix": "STL_CFS_",
            "extra": "ignore"
        }
    else:
        class Config:
            env_file = ".env"
            env_file_encoding = "utf-8"
            env_prefix = "STL_CFS_"


# Instantiate settings
settings = Settings()
