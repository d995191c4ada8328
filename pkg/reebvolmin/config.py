"""Runtime configuration from the environment."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from dotenv import load_dotenv

from reebvolmin.errors import ConfigError

ENV_PREFIX = "REEBVOLMIN_"


@dataclass(frozen=True)
class Config:
    """Configuration from environment."""

    threads: int | None = None
    tolerance: float = 1e-10
    max_iterations: int = 200
    coordinate_tolerance: float = 1e-6

    def with_overrides(self, **overrides: object) -> Config:
        """Return a copy where every non-None override replaces the stored value."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _env_int(name: str, default: int | None) -> int | None:
    """Read a positive integer environment variable."""
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        parsed = int(value)
    except ValueError as exc:
        raise ConfigError.for_variable(name, value) from exc
    if parsed < 1:
        raise ConfigError.for_variable(name, value)
    return parsed


def _env_float(name: str, default: float) -> float:
    """Read a positive float environment variable."""
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        parsed = float(value)
    except ValueError as exc:
        raise ConfigError.for_variable(name, value) from exc
    if not parsed > 0:
        raise ConfigError.for_variable(name, value)
    return parsed


def load_config() -> Config:
    """Load configuration from a .env file and environment variables."""
    load_dotenv()
    defaults = Config()
    max_iterations = _env_int(f"{ENV_PREFIX}MAX_ITERATIONS", defaults.max_iterations)
    return Config(
        threads=_env_int(f"{ENV_PREFIX}THREADS", defaults.threads),
        tolerance=_env_float(f"{ENV_PREFIX}TOLERANCE", defaults.tolerance),
        max_iterations=max_iterations if max_iterations is not None else defaults.max_iterations,
        coordinate_tolerance=_env_float(
            f"{ENV_PREFIX}COORDINATE_TOLERANCE", defaults.coordinate_tolerance
        ),
    )
