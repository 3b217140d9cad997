"""
PMF subproblem with the precoder fixed.

Under ZF the sum rate separates into K concave functions of the individual PMF rows; each is maximised by
projected gradient ascent on the simplex with a backtracking (sufficient-increase) step.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from packages.config.src.config import worker_count
from packages.constellation.src.constellation import project_rows_to_simplex
from packages.rate_engine.src.mixture import GridPolicy, NoiseModel, resolve_policy
from packages.rate_engine.src.rates import rate_zf, rate_zf_gradient
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_probability_rows
from .basis import ZfBasis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PmfSolverConfig:
    tol: float = 1e-6
    max_iters: int = 2000
    initial_step: float = 1.0
    max_step: float = 1e3

    def __post_init__(self):
        if not self.tol > 0 or self.max_iters < 1 or not self.initial_step > 0:
            raise Errors.InvalidInputError("PMF solver needs tol > 0, max_iters >= 1 and initial_step > 0")


def _project(p: np.ndarray) -> np.ndarray:
    return project_rows_to_simplex(p[None, :])[0]


def maximize_zf_rate(gain: float, constellation, p_init, noise: NoiseModel,
                     cfg: PmfSolverConfig = PmfSolverConfig(),
                     grid_policy: Optional[GridPolicy] = None):
    """
    Maximises the unclamped ZF rate of one user over its PMF row.

    :return: (p, objective in bits, iterations used, converged flag).
    """
    policy = resolve_policy(grid_policy)

    def objective(p):
        return rate_zf(gain, constellation, p, noise, policy, clamp=False)

    p = np.asarray(p_init, dtype=float).copy()
    value = objective(p)
    step = cfg.initial_step
    for iteration in range(1, cfg.max_iters + 1):
        grad = rate_zf_gradient(gain, constellation, p, noise, policy)
        mapping = _project(p + grad) - p
        if np.linalg.norm(mapping) < cfg.tol:
            return p, value, iteration, True

        while True:
            candidate = _project(p + step * grad)
            d = candidate - p
            candidate_value = objective(candidate)
            if candidate_value >= value + grad @ d - (d @ d) / (2.0 * step) or step < 1e-12:
                break
            step *= 0.5
        if candidate_value < value:
            # no ascent possible at machine precision
            return p, value, iteration, True
        p, value = candidate, candidate_value
        step = min(step * 2.0, cfg.max_step)

    logger.warning("PMF solver hit %d iterations without reaching tolerance %.1e", cfg.max_iters, cfg.tol)
    return p, value, cfg.max_iters, False


def solve_pmf_subproblem(basis: ZfBasis, W, constellations, P_init, noise: NoiseModel,
                         cfg: PmfSolverConfig = PmfSolverConfig(),
                         grid_policy: Optional[GridPolicy] = None) -> np.ndarray:
    """
    Solves the per-user concave PMF problems for a fixed ZF precoder.

    :param basis: ZF basis (its channel gives the effective gains h_kᵀ w_k).
    :param W: Current feasible precoder.
    :param constellations: K constellations.
    :param P_init: Strictly interior K×M starting point.
    :param noise: AWGN model.
    :param cfg: Tolerance (projected-gradient norm) and iteration cap.
    :return: The K×M PMF matrix.
    :raises InvalidInputError: If P_init is not strictly inside the simplex.
    """
    P_init = verify_probability_rows(np.atleast_2d(P_init), name="P_init", strict=True)
    W = np.asarray(W, dtype=float)
    gains = np.abs((basis.channel * W.T).sum(axis=1))

    def solve(k):
        p, value, iterations, converged = maximize_zf_rate(
            gains[k], constellations[k], P_init[k], noise, cfg, grid_policy
        )
        logger.debug("User %d PMF: rate %.6f bits after %d iterations (converged=%s)",
                     k + 1, value, iterations, converged)
        return p

    users = range(basis.users)
    workers = min(worker_count(), basis.users)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(solve, users))
    else:
        rows = [solve(k) for k in users]
    return np.vstack(rows)
