"""
Gaussian-mixture output densities and their differential entropies.

The received signal of user k is a Gaussian mixture with one component per tuple of transmitted
symbols; its entropy is computed with a fixed-step Riemann sum of −f log₂ f.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from packages.config.src.service import ConfigService
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_probability_rows, verify_positive

logger = logging.getLogger(__name__)

DENSITY_FLOOR = 1e-300
COVERAGE_SIGMAS = 6.0


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 1.0

    def __post_init__(self):
        verify_positive(self.sigma, "sigma")

    @property
    def entropy_bits(self) -> float:
        """Differential entropy ½ log₂(2πeσ²) of the noise."""
        return 0.5 * math.log2(2.0 * math.pi * math.e * self.sigma ** 2)


@dataclass(frozen=True)
class GridPolicy:
    """
    Quadrature settings. `binned` switches the entropy sums to `binned_density`.
    """
    points_per_sigma: int = 16
    margin_sigmas: float = 8.0
    binned: bool = False

    def __post_init__(self):
        if self.points_per_sigma < 4:
            raise Errors.InvalidInputError(
                f"points_per_sigma must be >= 4, got {self.points_per_sigma}"
            )
        if self.margin_sigmas < COVERAGE_SIGMAS:
            raise Errors.InvalidInputError(
                f"margin_sigmas must be >= {COVERAGE_SIGMAS}, got {self.margin_sigmas}"
            )

    @classmethod
    def from_config(cls) -> "GridPolicy":
        return cls(
            points_per_sigma=int(ConfigService.get("points_per_sigma")),
            margin_sigmas=float(ConfigService.get("grid_margin_sigmas")),
        )

    def refined(self, factor: int = 2) -> "GridPolicy":
        return GridPolicy(self.points_per_sigma * factor, self.margin_sigmas, self.binned)


def resolve_policy(policy: Optional[GridPolicy]) -> GridPolicy:
    return policy if policy is not None else GridPolicy.from_config()


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    means: np.ndarray
    weights: np.ndarray
    sigma: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if means.shape != weights.shape or means.size == 0:
            raise Errors.InvalidInputError("Mixture means and weights must be non-empty and of equal length")
        if not np.all(np.isfinite(means)):
            raise Errors.InvalidInputError("Mixture means must be finite")
        verify_probability_rows(weights, name="mixture weights")
        verify_positive(self.sigma, "sigma")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.means.size

    def density(self, y) -> np.ndarray:
        """
        Evaluates f(y) at the given points, in blocks bounded by the `density_chunk` setting.
        """
        y = np.asarray(y, dtype=float).ravel()
        out = np.empty_like(y)
        chunk = max(1, int(ConfigService.get("density_chunk")) // self.size)
        norm = 1.0 / (math.sqrt(2.0 * math.pi) * self.sigma)
        for start in range(0, y.size, chunk):
            block = y[start:start + chunk]
            z = (block[:, None] - self.means[None, :]) / self.sigma
            out[start:start + chunk] = np.exp(-0.5 * z * z) @ self.weights * norm
        return out

    def component_densities(self, y) -> np.ndarray:
        """
        :return: len(y)×size matrix of the unweighted component densities φ((y − μ)/σ)/σ.
        """
        y = np.asarray(y, dtype=float).ravel()
        z = (y[:, None] - self.means[None, :]) / self.sigma
        return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.sigma)


@dataclass(frozen=True)
class QuadratureGrid:
    lo: float
    hi: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise Errors.InvalidInputError(f"Grid bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_points < 2:
            raise Errors.InvalidInputError(f"Grid needs at least 2 points, got {self.n_points}")

    @property
    def delta(self) -> float:
        return (self.hi - self.lo) / self.n_points

    @property
    def points(self) -> np.ndarray:
        """Midpoints of the N rectangular partitions."""
        return self.lo + (np.arange(self.n_points) + 0.5) * self.delta


def auto_grid(mix: GaussianMixture, points_per_sigma: int = 16, margin_sigmas: float = 8.0) -> QuadratureGrid:
    """
    Builds a grid spanning [min mean − 8σ, max mean + 8σ] with step σ/points_per_sigma.

    :param mix: Mixture whose support the grid must cover.
    :param points_per_sigma: Partitions per noise standard deviation, at least 4.
    :param margin_sigmas: Margin beyond the extreme means, in σ units.
    """
    if points_per_sigma < 4:
        raise Errors.InvalidInputError(f"points_per_sigma must be >= 4, got {points_per_sigma}")
    delta = mix.sigma / points_per_sigma
    lo = float(mix.means.min()) - margin_sigmas * mix.sigma
    hi = float(mix.means.max()) + margin_sigmas * mix.sigma
    n_points = max(2, math.ceil((hi - lo) / delta - 1e-9))
    return QuadratureGrid(lo, lo + n_points * delta, n_points)


def grid_for(mix: GaussianMixture, policy: Optional[GridPolicy] = None) -> QuadratureGrid:
    policy = resolve_policy(policy)
    return auto_grid(mix, policy.points_per_sigma, policy.margin_sigmas)


def verify_coverage(mix: GaussianMixture, grid: QuadratureGrid):
    needed_lo = float(mix.means.min()) - COVERAGE_SIGMAS * mix.sigma
    needed_hi = float(mix.means.max()) + COVERAGE_SIGMAS * mix.sigma
    if grid.lo > needed_lo or grid.hi < needed_hi:
        raise Errors.GridCoverageError(grid.lo, grid.hi, needed_lo, needed_hi)


def binned_density(mix: GaussianMixture, grid: QuadratureGrid) -> np.ndarray:
    """
    Approximates f on the grid points in O(n log n): every component weight is split linearly between the
    two grid points around its mean and the result is convolved with the Gaussian kernel sampled at step Δ.
    A component is displaced by at most Δ/2, so the relative density error stays near Δ²/8σ².

    The grid must cover every mean (see `verify_coverage`).
    """
    n = grid.n_points
    position = (mix.means - grid.lo) / grid.delta - 0.5
    left = np.floor(position).astype(int)
    right_share = position - left
    mass = (
        np.bincount(left, mix.weights * (1.0 - right_share), minlength=n + 1)
        + np.bincount(left + 1, mix.weights * right_share, minlength=n + 1)
    )[:n]
    offsets = np.arange(-(n - 1), n) * grid.delta / mix.sigma
    kernel = np.exp(-0.5 * offsets * offsets) / (math.sqrt(2.0 * math.pi) * mix.sigma)
    return fftconvolve(mass, kernel, mode="full")[n - 1:2 * n - 1]


def differential_entropy(mix: GaussianMixture, grid: QuadratureGrid, binned: bool = False) -> float:
    """
    Riemann-sum differential entropy −Σ f(yₙ) log₂ f(yₙ) Δ in bits, skipping points where f < 1e-300.

    :param binned: Evaluate f with `binned_density` instead of summing every component at every point.
    :raises GridCoverageError: If the grid does not cover mean ± 6σ of every component.
    """
    verify_coverage(mix, grid)
    f = binned_density(mix, grid) if binned else mix.density(grid.points)
    f = f[f >= DENSITY_FLOOR]
    return float(-np.sum(f * np.log2(f)) * grid.delta)


def _check_cap(components: int):
    cap = int(ConfigService.get("component_cap"))
    if components > cap:
        raise Errors.ComponentCapError(components, cap)


def effective_gains(h_k, W) -> np.ndarray:
    h_k = np.asarray(h_k, dtype=float).ravel()
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != h_k.size:
        raise Errors.InvalidInputError(
            f"Precoder shape {W.shape} does not match a channel row of length {h_k.size}"
        )
    return h_k @ W


def _check_dimensions(gains, constellations: Sequence, P) -> np.ndarray:
    P = verify_probability_rows(np.atleast_2d(P), name="P")
    if len(constellations) != gains.size or P.shape[0] != gains.size:
        raise Errors.InvalidInputError(
            f"Got {gains.size} precoder columns, {len(constellations)} constellations and {P.shape[0]} PMF rows"
        )
    for i, constellation in enumerate(constellations):
        if constellation.m != P.shape[1]:
            raise Errors.InvalidInputError(
                f"User {i + 1} uses {constellation.m}-PAM but its PMF row has {P.shape[1]} entries"
            )
    return P


def _cartesian_mixture(gains, constellations, P, users, sigma) -> GaussianMixture:
    _check_cap(P.shape[1] ** len(users))
    means = np.zeros(1)
    weights = np.ones(1)
    for i in users:
        levels = gains[i] * constellations[i].amplitudes
        means = (means[:, None] + levels[None, :]).ravel()
        weights = (weights[:, None] * P[i][None, :]).ravel()
    return GaussianMixture(means, weights, sigma)


def mixture_signal(h_k, W, constellations: Sequence, P, sigma: float) -> GaussianMixture:
    """
    Output density f(y_k): one component per symbol tuple (m₁..m_K) with mean h_kᵀ Σᵢ wᵢ a_{i,mᵢ}
    and weight Πᵢ p_{i,mᵢ}.

    :raises ComponentCapError: If M^K exceeds the configured component cap.
    """
    gains = effective_gains(h_k, W)
    P = _check_dimensions(gains, constellations, P)
    return _cartesian_mixture(gains, constellations, P, list(range(gains.size)), sigma)


def mixture_interference(h_k, W, constellations: Sequence, P, sigma: float, k: int) -> GaussianMixture:
    """
    Interference-plus-noise density f(ȳ_k): the tuples exclude user k's own symbol, M^(K−1) components.
    For a single user it is the pure-noise density.
    """
    gains = effective_gains(h_k, W)
    P = _check_dimensions(gains, constellations, P)
    if not 0 <= k < gains.size:
        raise Errors.InvalidInputError(f"User index {k} out of range for {gains.size} users")
    others = [i for i in range(gains.size) if i != k]
    return _cartesian_mixture(gains, constellations, P, others, sigma)
