"""
Alternating optimisation of (P, W) under zero-forcing.

Starting from the scaled pseudo-inverse precoder and uniform signalling, each outer iteration solves the
PMF subproblem for the current precoder and then the CCP precoder subproblem for the new PMF.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from packages.constellation.src.constellation import repair_pmf, uniform_pmf
from packages.rate_engine.src.mixture import GridPolicy, NoiseModel, resolve_policy
from packages.rate_engine.src.rates import per_user_rates
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import max_row_l1
from .basis import zf_basis, zf_residual
from .ccp import CcpConfig, solve_precoder_subproblem
from .pmf_solver import PmfSolverConfig, solve_pmf_subproblem

logger = logging.getLogger(__name__)

INTERIOR_FLOOR = 1e-9


@dataclass(frozen=True)
class AoConfig:
    outer_iters: int = 20
    improvement_tol: float = 1e-5
    pmf: PmfSolverConfig = PmfSolverConfig()
    ccp: CcpConfig = CcpConfig()

    def __post_init__(self):
        if self.outer_iters < 1:
            raise Errors.InvalidInputError(f"outer_iters must be >= 1, got {self.outer_iters}")
        if self.improvement_tol < 0:
            raise Errors.InvalidInputError(f"improvement_tol must be >= 0, got {self.improvement_tol}")


@dataclass
class AoResult:
    w: np.ndarray
    p: np.ndarray
    sum_rate: float
    user_rates: np.ndarray
    sum_rate_trace: List[float] = field(default_factory=list)
    trace: List[dict] = field(default_factory=list)
    warning: bool = False


def run_ao(H, constellations, noise: NoiseModel, cfg: AoConfig = AoConfig(),
           grid_policy: Optional[GridPolicy] = None, fixed_pmf=None) -> AoResult:
    """
    Alternates between the PMF and precoder subproblems.

    :param H: K×N_T channel matrix with full row rank.
    :param constellations: K constellations.
    :param noise: AWGN model.
    :param cfg: Outer iteration count N₀, early-exit threshold and subproblem settings.
    :param fixed_pmf: Hold P at this matrix and optimise only the precoder (uniform-signalling baseline).
    :return: The final feasible pair, its ZF sum rate, the per-iteration sum-rate trace and detailed CCP rows
             (outer_iter, inner_iter, sum_rate_bits, max_row_l1, zf_residual).
    :raises InfeasibleZfError: If zero-forcing is undefined for H.
    """
    policy = resolve_policy(grid_policy)
    basis = zf_basis(H)
    k, m = basis.users, constellations[0].m
    W = basis.basis.copy()
    P = np.array(fixed_pmf, dtype=float) if fixed_pmf is not None else uniform_pmf(k, m)

    current = float(per_user_rates(H, W, constellations, P, noise, "zf", policy).sum())
    rates_trace = [current]
    rows = [{
        "outer_iter": 0, "inner_iter": 0, "sum_rate_bits": current,
        "max_row_l1": max_row_l1(W), "zf_residual": zf_residual(basis.channel, W),
    }]
    warning = False
    for r in range(1, cfg.outer_iters + 1):
        if fixed_pmf is None:
            P = solve_pmf_subproblem(basis, W, constellations, repair_pmf(P, INTERIOR_FLOOR), noise, cfg.pmf, policy)
        ccp = solve_precoder_subproblem(basis, P, W, noise, cfg.ccp, constellations=constellations, grid_policy=policy)
        warning = warning or ccp.warning
        W = ccp.w
        rate = float(per_user_rates(H, W, constellations, P, noise, "zf", policy).sum())
        rows.extend({"outer_iter": r, **row} for row in ccp.trace)
        rates_trace.append(rate)
        logger.debug("AO iteration %d: sum rate %.6f bits (%d CCP iterations)", r, rate, ccp.iterations)
        improvement = rate - current
        current = rate
        if improvement < cfg.improvement_tol:
            break

    user_rates = per_user_rates(H, W, constellations, P, noise, "zf", policy)
    logger.info("AO finished after %d outer iterations: sum rate %.6f bits", len(rates_trace) - 1, current)
    return AoResult(W, P, float(user_rates.sum()), user_rates, rates_trace, rows, warning)
