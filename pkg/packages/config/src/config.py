"""
Runtime configuration entry points.

`init` applies overrides on top of the defaults held by `ConfigService`; `worker_count` sizes the pools
of the sweep runner and the solvers. The quadrature settings are read through `GridPolicy.from_config`.
"""

import logging

from .service import ConfigService
from packages.utils.src.errors import Errors

logger = logging.getLogger(__name__)

_INT_KEYS = ("points_per_sigma", "component_cap", "density_chunk", "threads")


def init(configs=None):
    """
    Resets the runtime configuration and applies the given overrides.

    :param configs: Mapping of configuration keys to values.
    :raises InvalidInputError: If an integer option is not a positive integer or the grid policy is too coarse.
    """
    ConfigService.reset()
    configs = dict(configs or {})
    for key in _INT_KEYS:
        if key in configs and (not isinstance(configs[key], int) or configs[key] < 1):
            raise Errors.InvalidInputError(f'"{key}" must be a positive integer, got {configs[key]!r}')
    if configs.get("points_per_sigma", 4) < 4:
        raise Errors.InvalidInputError("points_per_sigma must be >= 4")
    if configs.get("grid_margin_sigmas", 6.0) < 6.0:
        raise Errors.InvalidInputError("grid_margin_sigmas must be >= 6 so every component stays covered")
    ConfigService.set(configs)
    logger.debug("Runtime configuration: %s", ConfigService._config)


def worker_count() -> int:
    return max(1, int(ConfigService.get("threads")))
