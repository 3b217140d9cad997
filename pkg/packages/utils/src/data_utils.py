import numpy as np

from packages.utils.src.errors import Errors

ROW_SUM_TOL = 1e-9
UNIT_NORM_TOL = 1e-12


def as_float_matrix(value, name: str, shape=None) -> np.ndarray:
    """
    Converts the input to a 2-D float array and checks that it is finite.

    :param value: Array-like input.
    :param name: Name used in error messages.
    :param shape: Optional expected shape; `None` entries are not checked.
    :return: A 2-D float64 array.
    :raises InvalidInputError: When the input is not 2-D, not finite or has the wrong shape.
    """
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise Errors.InvalidInputError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise Errors.InvalidInputError(f"{name} contains non-finite entries")
    if shape is not None:
        for axis, expected in enumerate(shape):
            if expected is not None and arr.shape[axis] != expected:
                raise Errors.InvalidInputError(
                    f"{name} has shape {arr.shape}, expected {tuple(shape)}"
                )
    return arr


def verify_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise Errors.InvalidInputError(f"{name} must be strictly positive, got {value}")
    return value


def verify_unit_vector(vector, name: str) -> np.ndarray:
    """
    Checks a 3-vector for unit Euclidean norm.

    :raises GeometryError: When the vector is not a 3-vector or its norm deviates from 1 by more than 1e-12.
    """
    v = np.asarray(vector, dtype=float)
    if v.shape != (3,):
        raise Errors.GeometryError(f"{name} must be a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_TOL:
        raise Errors.GeometryError(f"{name} must have unit norm, got {np.linalg.norm(v)!r}")
    return v


def verify_probability_rows(probs, name: str = "P", strict: bool = False) -> np.ndarray:
    """
    Validates a row-stochastic matrix (or a single probability vector).

    :param probs: Matrix whose rows are PMFs, or a 1-D PMF.
    :param name: Name used in error messages.
    :param strict: Require every entry in the open interval (0, 1), as optimizer starts do.
    :return: The input as a float array of the same dimensionality.
    :raises InvalidInputError: On negative entries, row sums off by more than 1e-9, or boundary entries in strict mode.
    """
    arr = np.asarray(probs, dtype=float)
    rows = arr.reshape(1, -1) if arr.ndim == 1 else arr
    if rows.ndim != 2 or rows.shape[1] == 0:
        raise Errors.InvalidInputError(f"{name} must be a vector or matrix of probabilities")
    if not np.all(np.isfinite(rows)):
        raise Errors.InvalidInputError(f"{name} contains non-finite entries")
    if np.any(rows < 0):
        raise Errors.InvalidInputError(f"{name} has negative entries")
    sums = rows.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        raise Errors.InvalidInputError(f"{name} rows must sum to 1, got {sums.tolist()}")
    if strict and np.any((rows <= 0) | (rows >= 1)):
        raise Errors.InvalidInputError(f"{name} must lie strictly inside the simplex")
    return arr


def max_row_l1(matrix) -> float:
    """
    :return: The largest row L1 norm of the matrix (0 for an empty matrix).
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.abs(arr).sum(axis=1).max())
