"""
Precoder subproblem with the PMF fixed, solved by the convex-concave procedure.

At CCP iteration j every Gaussian kernel exp(−(yₙ − h_kᵀw_k a_m)²/2σ²) is replaced by its first-order
Taylor expansion around W^(j−1), one expansion per (user, grid point, symbol). The resulting surrogate is
concave in the ZF coordinates g and is maximised by projected gradient ascent over {g ≥ 0, |B|g ≤ 1}.
A step that lowers the true objective is shortened along the segment back to W^(j−1).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from packages.rate_engine.src.mixture import DENSITY_FLOOR, GaussianMixture, GridPolicy, NoiseModel, grid_for, resolve_policy
from packages.rate_engine.src.rates import rate_zf
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import max_row_l1, verify_probability_rows
from .basis import ZfBasis, project_gains, zf_residual

logger = logging.getLogger(__name__)

_SEGMENT_HALVINGS = 40


@dataclass(frozen=True)
class CcpConfig:
    max_iters: int = 50
    tol: float = 1e-4
    inner_step: float = 1.0
    inner_max_iters: int = 200
    inner_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise Errors.InvalidInputError(f"CCP max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise Errors.InvalidInputError(f"CCP tol must be > 0, got {self.tol}")
        if not self.inner_step > 0 or self.inner_max_iters < 1:
            raise Errors.InvalidInputError("CCP inner_step must be > 0 and inner_max_iters >= 1")


@dataclass(frozen=True, eq=False)
class AffineKernel:
    """
    x(w) = value + value·(z/σ²)·a·h_kᵀ(w − w_prev), the tangent of exp(−z²/2σ²) at w_prev.
    """
    h_k: np.ndarray
    w_prev: np.ndarray
    amplitude: float
    z: float
    value: float
    sigma: float

    def slope(self) -> np.ndarray:
        return self.value * self.z / self.sigma ** 2 * self.amplitude * self.h_k

    def __call__(self, w) -> float:
        return self.value + float(self.slope() @ (np.asarray(w, dtype=float) - self.w_prev))


def ccp_linearize(h_k, w_prev, amplitude: float, y: float, sigma: float) -> AffineKernel:
    """
    Linearises the kernel exp(−(y − h_kᵀw a)²/2σ²) around the precoder column w_prev.

    :param h_k: Channel row of the user.
    :param w_prev: Expansion point (the user's precoder column at the previous CCP iterate).
    :param amplitude: Symbol amplitude a_{k,m}.
    :param y: Quadrature point yₙ.
    :param sigma: Noise standard deviation.
    """
    h_k = np.asarray(h_k, dtype=float).ravel()
    w_prev = np.asarray(w_prev, dtype=float).ravel()
    z = float(y - (h_k @ w_prev) * amplitude)
    return AffineKernel(h_k, w_prev, float(amplitude), z, math.exp(-z * z / (2.0 * sigma ** 2)), float(sigma))


class _UserSurrogate:
    """
    Surrogate entropy term of one user as a function of its scalar gain u = h_kᵀw_k:
        S(u) = −Σₙ Fₙ(u) log₂ Fₙ(u) Δ − ½log₂(2πeσ²),  Fₙ(u) = Aₙ + Bₙ(u − u_prev)
    with Aₙ, Bₙ the density and its tangent slope built from the linearised kernels.
    """

    def __init__(self, u_prev: float, u_max: float, constellation, p, noise: NoiseModel, policy: GridPolicy):
        sigma = noise.sigma
        reach = max(u_prev, u_max)
        grid = grid_for(GaussianMixture(reach * constellation.amplitudes, np.full(constellation.m, 1.0 / constellation.m), sigma), policy)
        y = grid.points
        z = y[:, None] - u_prev * constellation.amplitudes[None, :]
        kernels = np.exp(-z * z / (2.0 * sigma ** 2))
        norm = 1.0 / math.sqrt(2.0 * math.pi * sigma ** 2)
        self.A = norm * kernels @ p
        self.B = norm * (kernels * z * constellation.amplitudes[None, :] / sigma ** 2) @ p
        keep = self.A >= DENSITY_FLOOR
        self.A, self.B = self.A[keep], self.B[keep]
        self.u_prev = u_prev
        self.delta = grid.delta
        self.noise_entropy = noise.entropy_bits

    def density(self, u: float) -> np.ndarray:
        return self.A + self.B * (u - self.u_prev)

    def value(self, u: float) -> float:
        F = self.density(u)
        if np.any(F < 0):
            return -math.inf
        positive = F[F > 0]
        return float(-np.sum(positive * np.log2(positive)) * self.delta) - self.noise_entropy

    def derivative(self, u: float) -> float:
        F = self.density(u)
        positive = F > 0
        return float(-np.sum(self.B[positive] * (np.log2(F[positive]) + 1.0 / math.log(2.0))) * self.delta)


def true_objective(basis: ZfBasis, g, constellations, P, noise: NoiseModel, policy: GridPolicy) -> float:
    """Σ_k rate_zf(c_k g_k) for the ZF precoder B·diag(g)."""
    return float(sum(
        rate_zf(abs(basis.gains[k] * g[k]), constellations[k], P[k], noise, policy)
        for k in range(basis.users)
    ))


def surrogate_objective(basis: ZfBasis, g, g_prev, constellations, P, noise: NoiseModel,
                        policy: Optional[GridPolicy] = None) -> float:
    """Surrogate built around g_prev, evaluated at g (used to check tangency)."""
    policy = resolve_policy(policy)
    surrogates = _build_surrogates(basis, g_prev, constellations, P, noise, policy)
    return float(sum(s.value(basis.gains[k] * g[k]) for k, s in enumerate(surrogates)))


def _build_surrogates(basis, g_prev, constellations, P, noise, policy):
    g_max = basis.max_gains()
    return [
        _UserSurrogate(basis.gains[k] * g_prev[k], basis.gains[k] * g_max[k], constellations[k], P[k], noise, policy)
        for k in range(basis.users)
    ]


def _maximize_surrogate(basis: ZfBasis, surrogates, g_start, cfg: CcpConfig):
    """
    Projected gradient ascent of Σ_k S_k(c_k g_k) over the ZF peak polytope.

    :return: (g, converged flag).
    """
    A = basis.row_weights
    c = basis.gains

    def total(g):
        return sum(s.value(c[k] * g[k]) for k, s in enumerate(surrogates))

    g = np.asarray(g_start, dtype=float).copy()
    value = total(g)
    step = cfg.inner_step
    for _ in range(cfg.inner_max_iters):
        grad = np.array([c[k] * s.derivative(c[k] * g[k]) for k, s in enumerate(surrogates)])
        while True:
            candidate = project_gains(g + step * grad, A)
            d = candidate - g
            candidate_value = total(candidate)
            if candidate_value >= value + grad @ d - (d @ d) / (2.0 * step) or step < 1e-14:
                break
            step *= 0.5
        if candidate_value < value or np.linalg.norm(d) <= cfg.inner_tol * max(1.0, np.linalg.norm(g)):
            if candidate_value >= value:
                g = candidate
            return g, True
        g, value = candidate, candidate_value
        step = min(step * 2.0, 1e6 * cfg.inner_step)
    return g, False


@dataclass
class CcpResult:
    w: np.ndarray
    g: np.ndarray
    iterations: int
    converged: bool
    warning: bool
    trace: List[dict] = field(default_factory=list)


def solve_precoder_subproblem(basis: ZfBasis, P_fixed, W_init, noise: NoiseModel, cfg: CcpConfig = CcpConfig(),
                              *, constellations, grid_policy: Optional[GridPolicy] = None) -> CcpResult:
    """
    Runs the CCP iterations for the precoder with the PMF fixed.

    :param basis: ZF basis defining the feasible set.
    :param P_fixed: Valid K×M PMF matrix.
    :param W_init: Feasible starting precoder of the form B·diag(g).
    :param noise: AWGN model.
    :param cfg: Iteration cap N_max, tolerance ε on ‖W^(j) − W^(j−1)‖/‖W^(j)‖ and inner solver settings.
    :param constellations: K constellations.
    :return: The final precoder, its coordinates, the per-iteration trace and a warning flag set when an
             inner solve stopped at its iteration cap.
    """
    P = verify_probability_rows(np.atleast_2d(P_fixed), name="P_fixed")
    policy = resolve_policy(grid_policy)
    W = np.asarray(W_init, dtype=float)
    if max_row_l1(W) > 1.0 + 1e-9:
        raise Errors.InvalidInputError(f"W_init violates the peak constraint (max row L1 {max_row_l1(W):.6g})")
    g = project_gains(np.abs(basis.coordinates(W)), basis.row_weights)
    W = basis.precoder(g)
    current = true_objective(basis, g, constellations, P, noise, policy)

    trace = [_trace_row(0, current, basis, W)]
    warning = False
    converged = False
    iterations = 0
    for j in range(1, cfg.max_iters + 1):
        iterations = j
        surrogates = _build_surrogates(basis, g, constellations, P, noise, policy)
        candidate, inner_ok = _maximize_surrogate(basis, surrogates, g, cfg)
        if not inner_ok:
            warning = True
            logger.warning("CCP iteration %d: surrogate solver stopped at %d inner iterations", j, cfg.inner_max_iters)

        candidate_value = true_objective(basis, candidate, constellations, P, noise, policy)
        for _ in range(_SEGMENT_HALVINGS):
            if candidate_value >= current:
                break
            candidate = g + 0.5 * (candidate - g)
            candidate_value = true_objective(basis, candidate, constellations, P, noise, policy)
        if candidate_value < current:
            candidate, candidate_value = g, current

        W_next = basis.precoder(candidate)
        norm = np.linalg.norm(W_next)
        change = np.linalg.norm(W_next - W) / norm if norm > 0 else 0.0
        g, W, current = candidate, W_next, candidate_value
        trace.append(_trace_row(j, current, basis, W))
        logger.debug("CCP iteration %d: sum rate %.6f bits, relative change %.3g", j, current, change)
        if change <= cfg.tol:
            converged = True
            break

    return CcpResult(W, g, iterations, converged, warning, trace)


def _trace_row(j: int, rate: float, basis: ZfBasis, W) -> dict:
    return {
        "inner_iter": j,
        "sum_rate_bits": rate,
        "max_row_l1": max_row_l1(W),
        "zf_residual": zf_residual(basis.channel, W),
    }
