"""
Achievable rates, the constraint penalty and the firefly brightness.

R_k = h(y_k) − h(ȳ_k) for general precoding; under zero-forcing the interference mixture collapses
to the noise, so R_k = h(y_k) − ½ log₂(2πeσ²). All values are in bits.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from packages.constellation.src.constellation import pmf_entropy
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_probability_rows, as_float_matrix
from .mixture import (
    DENSITY_FLOOR,
    GaussianMixture,
    GridPolicy,
    NoiseModel,
    differential_entropy,
    effective_gains,
    grid_for,
    mixture_interference,
    mixture_signal,
    resolve_policy,
)

logger = logging.getLogger(__name__)

MODES = ("general", "zf")


@dataclass(frozen=True)
class PenaltyWeights:
    lambda1: float = 1e4
    lambda2: float = 1e4
    lambda3: float = 1e4
    lambda4: float = 1e4

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise Errors.InvalidInputError(f"{name} must be a nonnegative number, got {value!r}")


@dataclass(frozen=True, eq=False)
class RateProblem:
    """
    Everything a rate evaluation needs besides the decision variables (W, P).
    """
    H: np.ndarray
    constellations: Sequence
    noise: NoiseModel
    grid_policy: Optional[GridPolicy] = None
    penalty_weights: PenaltyWeights = PenaltyWeights()

    def __post_init__(self):
        H = as_float_matrix(self.H, "H")
        if np.any(H < 0):
            raise Errors.InvalidInputError("Channel gains must be nonnegative")
        if len(self.constellations) != H.shape[0]:
            raise Errors.InvalidInputError(
                f"{H.shape[0]} users in H but {len(self.constellations)} constellations"
            )
        object.__setattr__(self, "H", H)

    @property
    def users(self) -> int:
        return self.H.shape[0]

    @property
    def leds(self) -> int:
        return self.H.shape[1]

    @property
    def order(self) -> int:
        return self.constellations[0].m


def rate_general(h_k, W, constellations, P, noise: NoiseModel, grid_policy: Optional[GridPolicy], k: int,
                 clamp: bool = True) -> float:
    """
    Achievable rate of user k treating multi-user interference as part of the channel.

    :param h_k: Channel row of user k (length N_T).
    :param W: N_T×K precoding matrix.
    :param constellations: K constellations.
    :param P: K×M PMF matrix.
    :param noise: AWGN model.
    :param grid_policy: Quadrature policy; the configured default when `None`.
    :param k: Zero-based user index.
    :param clamp: Clamp the result at 0 (disable only to inspect quadrature error).
    :return: h(y_k) − h(ȳ_k) in bits.
    """
    policy = resolve_policy(grid_policy)
    gains = effective_gains(h_k, W)
    if not 0 <= k < gains.size:
        raise Errors.InvalidInputError(f"User index {k} out of range for {gains.size} users")
    if gains[k] == 0.0:
        # own symbol does not reach the receiver: y_k and ȳ_k share one density
        return 0.0
    signal = mixture_signal(h_k, W, constellations, P, noise.sigma)
    interference = mixture_interference(h_k, W, constellations, P, noise.sigma, k)
    value = (
        differential_entropy(signal, grid_for(signal, policy), policy.binned)
        - differential_entropy(interference, grid_for(interference, policy), policy.binned)
    )
    return max(0.0, value) if clamp else value


def zf_mixture(gain: float, constellation, pmf_row, sigma: float) -> GaussianMixture:
    return GaussianMixture(gain * constellation.amplitudes, pmf_row, sigma)


def rate_zf(gain: float, constellation, pmf_row, noise: NoiseModel, grid_policy: Optional[GridPolicy] = None,
            clamp: bool = True) -> float:
    """
    Rate of a user whose interference has been zero-forced: the output is an M-component mixture with
    means c_k·a_m and weights p_m.

    :param gain: Effective gain c_k = h_kᵀ w_k, nonnegative.
    :return: h(y_k) − ½ log₂(2πeσ²), clamped to [0, H(p)] unless `clamp` is False.
    """
    if not np.isfinite(gain) or gain < 0:
        raise Errors.InvalidInputError(f"ZF gain must be >= 0, got {gain!r}")
    p = verify_probability_rows(np.asarray(pmf_row, dtype=float).ravel(), name="pmf row")
    if gain == 0.0:
        return 0.0
    policy = resolve_policy(grid_policy)
    mix = zf_mixture(gain, constellation, p, noise.sigma)
    value = differential_entropy(mix, grid_for(mix, policy), policy.binned) - noise.entropy_bits
    if not clamp:
        return value
    return min(max(0.0, value), pmf_entropy(p))


def rate_zf_gradient(gain: float, constellation, pmf_row, noise: NoiseModel,
                     grid_policy: Optional[GridPolicy] = None) -> np.ndarray:
    """
    Gradient of the unclamped ZF rate with respect to the PMF row:
        ∂R/∂p_m = −Δ Σₙ φ_m(yₙ) (log₂ f(yₙ) + 1/ln 2)
    evaluated on the same grid and density floor as the rate itself.
    """
    p = np.asarray(pmf_row, dtype=float).ravel()
    mix = zf_mixture(gain, constellation, p, noise.sigma)
    grid = grid_for(mix, grid_policy)
    y = grid.points
    f = mix.density(y)
    keep = f >= DENSITY_FLOOR
    phi = mix.component_densities(y[keep])
    g = np.log2(f[keep]) + 1.0 / math.log(2.0)
    return -(phi.T @ g) * grid.delta


def per_user_rates(H, W, constellations, P, noise: NoiseModel, mode: str = "general",
                   grid_policy: Optional[GridPolicy] = None) -> np.ndarray:
    """
    :param mode: "general" evaluates h(y_k) − h(ȳ_k); "zf" assumes the interference is zero-forced and
                 uses only the diagonal gains h_kᵀ w_k.
    :return: Vector of the K user rates in bits.
    """
    if mode not in MODES:
        raise Errors.InvalidInputError(f"Unknown rate mode {mode!r}, expected one of {MODES}")
    H = as_float_matrix(H, "H")
    W = as_float_matrix(W, "W", shape=(H.shape[1], H.shape[0]))
    P = verify_probability_rows(np.atleast_2d(P), name="P")
    policy = resolve_policy(grid_policy)
    rates = np.zeros(H.shape[0])
    for k in range(H.shape[0]):
        if mode == "general":
            rates[k] = rate_general(H[k], W, constellations, P, noise, policy, k)
        else:
            gain = abs(float(H[k] @ W[:, k]))
            rates[k] = rate_zf(gain, constellations[k], P[k], noise, policy)
    return rates


def sum_rate(H, W, constellations, P, noise: NoiseModel, mode: str = "general",
             grid_policy: Optional[GridPolicy] = None) -> float:
    """Σ_k R_k under the selected mode."""
    return float(per_user_rates(H, W, constellations, P, noise, mode, grid_policy).sum())


# Norm excesses at rounding level count as feasible.
NORM_TOL = 1e-12


def _excess(x):
    return np.where(x > NORM_TOL, x, 0.0)


def penalty(P, W, weights: PenaltyWeights) -> float:
    """
    Quadratic hinge penalty of the peak and PMF constraints:
        λ₁ Σₙ max(0, ‖W row n‖₁ − 1)² + λ₂ ΣΣ min(0, p)² + λ₃ ΣΣ max(0, p − 1)² + λ₄ Σ_k max(0, ‖P row k‖₁ − 1)²

    :param P: Raw (possibly infeasible) K×M matrix.
    :param W: Raw (possibly infeasible) N_T×K matrix.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    row_excess = _excess(np.abs(W).sum(axis=1) - 1.0)
    below = np.minimum(0.0, P)
    above = np.maximum(0.0, P - 1.0)
    pmf_excess = _excess(np.abs(P).sum(axis=1) - 1.0)
    return float(
        weights.lambda1 * np.sum(row_excess ** 2)
        + weights.lambda2 * np.sum(below ** 2)
        + weights.lambda3 * np.sum(above ** 2)
        + weights.lambda4 * np.sum(pmf_excess ** 2)
    )


def sanitize_pmf(P) -> np.ndarray:
    """
    Makes a raw PMF matrix usable by the rate formulas: entries clamped to [0, 1] and rows renormalised.
    Rows that already form valid PMFs are returned unchanged; an all-zero row becomes uniform.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    clipped = np.clip(P, 0.0, 1.0)
    sums = clipped.sum(axis=1, keepdims=True)
    valid = np.all(clipped == P, axis=1, keepdims=True) & (np.abs(sums - 1.0) <= 1e-9)
    uniform = np.full_like(P, 1.0 / P.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        renormalised = np.where(sums > 0, clipped / sums, uniform)
    return np.where(valid, P, renormalised)


def fitness(P, W, problem: RateProblem) -> float:
    """
    Firefly brightness: general-mode sum rate at the sanitised PMF minus the penalty on the raw values.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    W = np.asarray(W, dtype=float)
    rate = sum_rate(problem.H, W, problem.constellations, sanitize_pmf(P), problem.noise,
                    "general", problem.grid_policy)
    return rate - penalty(P, W, problem.penalty_weights)
