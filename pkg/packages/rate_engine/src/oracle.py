"""
Monte Carlo estimates used to cross-check the quadrature.

h(Y) ≈ −mean(log₂ f(Yᵢ)) with Yᵢ drawn from the mixture itself.
"""

import math

import numpy as np
from scipy.special import logsumexp

from .mixture import GaussianMixture, NoiseModel, mixture_interference, mixture_signal

DEFAULT_SAMPLES = 10 ** 6
_BLOCK = 2 ** 16


def log2_density(mix: GaussianMixture, y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    out = np.empty_like(y)
    log_norm = math.log(math.sqrt(2.0 * math.pi) * mix.sigma)
    for start in range(0, y.size, _BLOCK):
        z = (y[start:start + _BLOCK, None] - mix.means[None, :]) / mix.sigma
        out[start:start + _BLOCK] = logsumexp(-0.5 * z * z, b=mix.weights[None, :], axis=1) - log_norm
    return out / math.log(2.0)


def sample_mixture(mix: GaussianMixture, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    labels = rng.choice(mix.size, size=n_samples, p=mix.weights)
    return mix.means[labels] + mix.sigma * rng.standard_normal(n_samples)


def monte_carlo_entropy(mix: GaussianMixture, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    samples = sample_mixture(mix, n_samples, rng)
    return float(-np.mean(log2_density(mix, samples)))


def monte_carlo_rate(h_k, W, constellations, P, noise: NoiseModel, k: int,
                     n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    """
    Monte Carlo estimate of h(y_k) − h(ȳ_k); the two entropies use independent seeded streams.
    """
    signal = mixture_signal(h_k, W, constellations, P, noise.sigma)
    interference = mixture_interference(h_k, W, constellations, P, noise.sigma, k)
    return (
        monte_carlo_entropy(signal, n_samples, seed)
        - monte_carlo_entropy(interference, n_samples, seed + 1)
    )


def monte_carlo_sum_rate(H, W, constellations, P, noise: NoiseModel,
                         n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    H = np.asarray(H, dtype=float)
    return float(sum(
        monte_carlo_rate(H[k], W, constellations, P, noise, k, n_samples, seed + 2 * k)
        for k in range(H.shape[0])
    ))
