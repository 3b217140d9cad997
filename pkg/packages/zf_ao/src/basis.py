"""
Zero-forcing feasible set.

Every ZF precoder handled here has the form W = B·diag(g), g ≥ 0, where B is the right pseudo-inverse of H
scaled so that its largest row L1 norm is exactly 1. The peak constraint then reads |B|·g ≤ 1 row-wise.
"""

import logging
from dataclasses import dataclass

import numpy as np

from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import as_float_matrix

logger = logging.getLogger(__name__)

ZF_RESIDUAL_TOL = 1e-9
_DYKSTRA_ITERS = 2000
_DYKSTRA_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class ZfBasis:
    channel: np.ndarray
    basis: np.ndarray
    gains: np.ndarray

    @property
    def users(self) -> int:
        return self.channel.shape[0]

    @property
    def row_weights(self) -> np.ndarray:
        """|B|: row n of the peak constraint is row_weights[n] · g ≤ 1."""
        return np.abs(self.basis)

    def precoder(self, g) -> np.ndarray:
        return self.basis * np.asarray(g, dtype=float)[None, :]

    def coordinates(self, W) -> np.ndarray:
        """
        Recovers g from a precoder of the form B·diag(g).
        """
        W = np.asarray(W, dtype=float)
        return (self.channel * W.T).sum(axis=1) / self.gains

    def max_gains(self) -> np.ndarray:
        """Largest feasible g_k when every other coordinate is 0."""
        return 1.0 / self.row_weights.max(axis=0)


def zf_basis(H) -> ZfBasis:
    """
    Builds the scaled pseudo-inverse basis B = Hᵀ(HHᵀ)⁻¹ / max_n ‖row n‖₁.

    :param H: K×N_T channel matrix with full row rank.
    :return: The basis with its effective gains c_k = h_kᵀ b_k > 0.
    :raises InfeasibleZfError: If H does not have rank K (e.g. two users with colinear channels).
    """
    H = as_float_matrix(H, "H")
    users, leds = H.shape
    rank = int(np.linalg.matrix_rank(H))
    if users > leds or rank < users:
        raise Errors.InfeasibleZfError(rank, users)

    scale = np.abs(H).max()
    Hn = H / scale
    B = Hn.T @ np.linalg.solve(Hn @ Hn.T, np.eye(users)) / scale
    B = B / np.abs(B).sum(axis=1).max()
    gains = (H * B.T).sum(axis=1)
    if np.any(gains <= 0):
        raise Errors.InfeasibleZfError(rank, users, {"gains": gains.tolist()})
    logger.debug("ZF basis gains: %s", gains)
    return ZfBasis(H, B, gains)


def zf_residual(H, W) -> float:
    """
    max_{i≠k} |h_kᵀ w_i| / (‖h_k‖‖w_i‖); 0 for a single user or vanishing columns.
    """
    H = np.asarray(H, dtype=float)
    W = np.asarray(W, dtype=float)
    cross = np.abs(H @ W)
    norms = np.outer(np.linalg.norm(H, axis=1), np.linalg.norm(W, axis=0))
    np.fill_diagonal(cross, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(norms > 0, cross / np.where(norms > 0, norms, 1.0), 0.0)
    return float(ratio.max()) if ratio.size else 0.0


def project_gains(v, row_weights) -> np.ndarray:
    """
    Euclidean projection of v onto {g ≥ 0, row_weights · g ≤ 1} by Dykstra's alternating projections over the
    half-spaces and the orthant. The result is finally rescaled into the set so it is always feasible.
    """
    A = np.asarray(row_weights, dtype=float)
    x = np.asarray(v, dtype=float).copy()
    sets = A.shape[0] + 1
    corrections = np.zeros((sets, x.size))
    norms2 = np.sum(A * A, axis=1)
    for _ in range(_DYKSTRA_ITERS):
        previous = x.copy()
        for s in range(sets):
            y = x + corrections[s]
            if s < A.shape[0]:
                violation = A[s] @ y - 1.0
                projected = y - (violation / norms2[s]) * A[s] if violation > 0 and norms2[s] > 0 else y
            else:
                projected = np.maximum(y, 0.0)
            corrections[s] = y - projected
            x = projected
        if np.max(np.abs(x - previous)) <= _DYKSTRA_TOL:
            break
    x = np.maximum(x, 0.0)
    load = (A @ x).max() if A.size else 0.0
    if load > 1.0:
        x = x / load
    return x
