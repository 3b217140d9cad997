"""
ConfigService Module

The `ConfigService` module holds the runtime settings shared by the numerical modules: the quadrature
grid policy, the mixture component cap, the block size used when densities are evaluated and the
size of the sweep worker pool.

Settings can be changed at any point with `ConfigService.set`; every module reads them at call time,
so a change is picked up by the next rate evaluation. `ConfigService.reset` restores the defaults.
"""

import os
from typing import Any, Dict

from packages.utils.src.errors import Errors

THREADS_ENV = "VLC_SHAPER_THREADS"

_MISSING = object()


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise Errors.InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}")
        if value < 1:
            raise Errors.InvalidInputError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def defaults() -> Dict[str, Any]:
    return {
        "points_per_sigma": 16,
        "grid_margin_sigmas": 8.0,
        "component_cap": 2 ** 20,
        "density_chunk": 2 ** 22,
        "threads": _default_threads(),
    }


class ConfigService:
    _config: Dict[str, Any] = defaults()

    @classmethod
    def get(cls, key: str, default: Any = _MISSING) -> Any:
        """
        Retrieves the value of a specified configuration option.

        :param key: The key of the configuration option to retrieve.
        :param default: Value returned when the key is not set.
        :return: The value of the configuration option.
        :raises ConfigNotSetError: If the key is not set and no default was given.
        """
        if key not in cls._config:
            if default is _MISSING:
                raise Errors.ConfigNotSetError(key)
            return default
        return cls._config[key]

    @classmethod
    def set(cls, configs: Dict[str, Any]) -> None:
        """
        Sets one or more configuration options.

        :param configs: An object containing key-value pairs of configuration options.
        """
        cls._config.update(configs)

    @classmethod
    def unset(cls, key: str) -> None:
        """
        Removes a configuration option.

        :param key: The key of the configuration option to remove.
        """
        if key in cls._config:
            del cls._config[key]

    @classmethod
    def is_set(cls, key: str) -> bool:
        return key in cls._config

    @classmethod
    def reset(cls) -> None:
        """
        Restores every option to its default value (re-reading the thread environment variable).
        """
        cls._config = defaults()
