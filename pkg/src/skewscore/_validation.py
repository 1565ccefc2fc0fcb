"""Input checks shared by the public API."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


class ParameterError(ValueError):
    """A parameter is outside the domain an operation accepts."""


class NumericError(ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class DataError(ValueError):
    """Input data is malformed (non-finite values, wrong shape)."""


def check_data(X, *, min_samples: int = 1, name: str = "X") -> np.ndarray:
    """Return ``X`` as a finite float64 2-D array or raise :class:`DataError`."""
    try:
        X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples)
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from exc
    return X


def check_vector(v, *, name: str = "column") -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} contains non-finite values")
    return v


def check_rng(rng) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
