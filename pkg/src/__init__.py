from typing import Optional

from src.config.app_config import AppConfig
from src.utils import setup_logging


def create_app(log_level: Optional[str] = None) -> AppConfig:
    """Application factory: configure logging and load the environment settings"""
    app_config = AppConfig()
    if log_level:
        app_config.log_level = log_level

    # Setup logging
    setup_logging(app_config.log_level)
    return app_config
