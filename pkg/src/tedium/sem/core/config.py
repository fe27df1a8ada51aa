"""Process-wide runtime settings.

Only the worker-thread count lives here. It is read from the
``TEDIUM_SEM_THREADS`` environment variable on first use and can be
overridden with :func:`configure` (the command line does this for
``--threads``).
"""

from __future__ import annotations

import logging
import os
import threading
from typing import Mapping, Optional

from tedium.sem.core.base import FrozenRecord
from tedium.sem.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "TEDIUM_SEM_THREADS"


class Settings(FrozenRecord):
    """Runtime knobs shared by the numerical kernels."""

    _fields = ("threads",)

    threads: int

    def __init__(self, *, threads: int = 1) -> None:
        super().__init__(threads=threads)

    def validate(self) -> None:
        if isinstance(self.threads, bool) or not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}", value=self.threads)


def settings_from_env(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Build settings from environment variables.

    Args:
        environ: Mapping to read from, ``os.environ`` by default

    Returns:
        Settings with the configured thread count (1 when unset)

    Raises:
        ConfigError: If the variable is set but not a positive integer
    """
    env = os.environ if environ is None else environ
    raw = env.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return Settings()
    try:
        threads = int(raw)
    except ValueError as e:
        raise ConfigError(
            f"{THREADS_ENV_VAR} must be an integer, got {raw!r}",
            value=raw,
            variable=THREADS_ENV_VAR,
        ) from e
    return Settings(threads=threads)


_settings: Optional[Settings] = None
_lock = threading.Lock()


def get_settings() -> Settings:
    """Return the active settings, reading the environment on first use."""
    global _settings
    with _lock:
        if _settings is None:
            _settings = settings_from_env()
        return _settings


def configure(*, threads: Optional[int] = None) -> Settings:
    """Override process-wide settings.

    Args:
        threads: New worker-thread count, unchanged when None

    Returns:
        The settings now in effect
    """
    global _settings
    current = get_settings()
    updated = current if threads is None else current.replace(threads=threads)
    with _lock:
        _settings = updated
    logger.debug("settings: threads=%d", updated.threads)
    return updated
