"""
Bipolar M-PAM alphabets with probabilistic shaping.

A `Constellation` fixes the amplitude levels of one user; the shaping lives in a separate K×M PMF
matrix whose row k is the symbol distribution of user k.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_probability_rows


def pam_amplitudes(m: int, peak: float) -> np.ndarray:
    """
    Returns the M equally spaced levels ((2i − M − 1)/(M − 1))·A, i = 1..M.

    :param m: Alphabet size, at least 2.
    :param peak: Peak amplitude A > 0.
    :raises InvalidInputError: If m < 2 or peak ≤ 0.
    """
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise Errors.InvalidInputError(f"PAM order must be an integer >= 2, got {m!r}")
    if not np.isfinite(peak) or peak <= 0:
        raise Errors.InvalidInputError(f"Peak amplitude must be > 0, got {peak!r}")
    m = int(m)
    index = np.arange(1, m + 1)
    return (2 * index - m - 1) / (m - 1) * float(peak)


@dataclass(frozen=True)
class Constellation:
    m: int
    peak: float
    amplitudes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", pam_amplitudes(self.m, self.peak))
        self.amplitudes.setflags(write=False)


def shared_constellations(k: int, m: int, peak: float):
    """
    :return: K identical constellations, every user having the same peak amplitude.
    """
    if k < 1:
        raise Errors.InvalidInputError(f"Number of users must be >= 1, got {k}")
    constellation = Constellation(m, peak)
    return [constellation] * k


def uniform_pmf(k: int, m: int) -> np.ndarray:
    """
    :return: K×M matrix with every entry 1/M.
    """
    if k < 1 or m < 2:
        raise Errors.InvalidInputError(f"uniform_pmf needs k >= 1 and m >= 2, got k={k}, m={m}")
    return np.full((k, m), 1.0 / m)


def pmf_entropy(row) -> float:
    """
    Entropy −Σ p log₂ p of a PMF in bits, with 0·log 0 = 0.

    :raises InvalidInputError: On negative entries or a sum off by more than 1e-9.
    """
    p = verify_probability_rows(np.asarray(row, dtype=float).ravel(), name="pmf row")
    return float(-xlogy(p, p).sum() / np.log(2.0))


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def active_symbols(p, threshold: float = 1e-3) -> int:
    return int(np.count_nonzero(np.asarray(p) > threshold))


def project_rows_to_simplex(V) -> np.ndarray:
    """
    Euclidean projection of every row of V onto the probability simplex:
        argmin_{y >= 0, sum(y) = 1} ||y - v||^2

    Sort-based, O(M log M) per row.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n_features = V.shape[1]
    U = np.sort(V, axis=1)[:, ::-1]
    cssv = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(n_features) + 1
    cond = U - cssv / ind > 0
    rho = np.count_nonzero(cond, axis=1)
    theta = cssv[np.arange(len(V)), rho - 1] / rho
    return np.maximum(V - theta[:, np.newaxis], 0.0)


def repair_pmf(raw, floor: float = 1e-6) -> np.ndarray:
    """
    Clamps raw probabilities to [floor, 1] and renormalises every row exactly.
    """
    clipped = np.clip(np.atleast_2d(np.asarray(raw, dtype=float)), floor, 1.0)
    return clipped / clipped.sum(axis=1, keepdims=True)
