import os

from dotenv import load_dotenv

from src.utils.exceptions import ConfigError

# Load environment variables
load_dotenv(override=True)


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError({name: f"must be an integer, got {value!r}"})


class AppConfig:
    """Process-level settings read from the environment (and a .env file)"""

    def __init__(self):
        self.log_level = os.getenv("FAIRPAIRS_LOG_LEVEL", "INFO")
        self.output_dir = os.getenv("FAIRPAIRS_OUTPUT_DIR", "output")
        self.workers = max(1, _int_env("FAIRPAIRS_WORKERS", 1))

        # Convergence runs (`verify theorem2`)
        self.check_every = max(1, _int_env("FAIRPAIRS_CHECK_EVERY", 5000))
        self.max_queries = max(1, _int_env("FAIRPAIRS_MAX_QUERIES", 4_000_000))

    def to_dict(self):
        return {
            "log_level": self.log_level,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "check_every": self.check_every,
            "max_queries": self.max_queries,
        }
