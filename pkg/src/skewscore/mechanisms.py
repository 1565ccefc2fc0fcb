"""Noise laws and differentiable mechanism functions for HSNM data.

Every mechanism function maps an ``(n, k)`` array of parent values to an
``(n,)`` array and exposes ``grad`` returning the ``(n, k)`` Jacobian, so the
same objects drive both sampling and the analytic score oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ._validation import ParameterError

EULER_GAMMA = float(np.euler_gamma)

NOISE_KINDS = ("gaussian", "student_t", "gumbel", "laplace")


@dataclass(frozen=True)
class NoiseSpec:
    """Law of an exogenous noise term.

    Parameters
    ----------
    kind : {"gaussian", "student_t", "gumbel", "laplace"}
    scale : float
        Standard deviation for Gaussian, scale for the others.
    df : float, optional
        Degrees of freedom, Student's t only.
    centered : bool
        Gumbel only: shift the location by ``-scale * euler_gamma`` so the
        noise has mean zero.
    """

    kind: str = "gaussian"
    scale: float = 1.0
    df: float | None = None
    centered: bool = True

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if not self.scale > 0:
            raise ParameterError(f"noise scale must be > 0, got {self.scale}")
        if self.kind == "student_t" and not (self.df is not None and self.df > 0):
            raise ParameterError("student_t noise needs df > 0")

    @property
    def symmetric(self) -> bool:
        return self.kind != "gumbel"

    @property
    def _loc(self) -> float:
        if self.kind == "gumbel" and self.centered:
            return -self.scale * EULER_GAMMA
        return 0.0

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        s = self.scale
        if self.kind == "gaussian":
            return s * rng.standard_normal(size)
        if self.kind == "student_t":
            return s * rng.standard_t(self.df, size)
        if self.kind == "laplace":
            return rng.laplace(0.0, s, size)
        return rng.gumbel(self._loc, s, size)

    def logpdf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        s = self.scale
        if self.kind == "gaussian":
            return stats.norm.logpdf(u, scale=s)
        if self.kind == "student_t":
            return stats.t.logpdf(u, self.df, scale=s)
        if self.kind == "laplace":
            return stats.laplace.logpdf(u, scale=s)
        return stats.gumbel_r.logpdf(u, loc=self._loc, scale=s)

    def score(self, u) -> np.ndarray:
        """Derivative of :meth:`logpdf`."""
        u = np.asarray(u, dtype=float)
        s = self.scale
        if self.kind == "gaussian":
            return -u / s**2
        if self.kind == "student_t":
            return -(self.df + 1.0) * u / (self.df * s**2 + u**2)
        if self.kind == "laplace":
            return -np.sign(u) / s
        z = (u - self._loc) / s
        return (np.exp(-z) - 1.0) / s

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "scale": self.scale}
        if self.kind == "student_t":
            out["df"] = self.df
        if self.kind == "gumbel":
            out["centered"] = self.centered
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(**d)


def _as_2d(U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    return U[:, None] if U.ndim == 1 else U


class Zero:
    """f = 0 (root-node mean)."""

    def __call__(self, U):
        return np.zeros(_as_2d(U).shape[0])

    def grad(self, U):
        return np.zeros_like(_as_2d(U))


class Constant:
    """Constant positive scale; root nodes use ``Constant(1.0)``."""

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def __call__(self, U):
        return np.full(_as_2d(U).shape[0], self.value)

    def grad(self, U):
        return np.zeros_like(_as_2d(U))


_CHUNK_ROWS = 2048


class RandomFourierFunction:
    """One draw from a zero-mean GP with RBF kernel, as a random-feature sum.

    ``f(u) = sqrt(2/M) * sum_m a_m cos(w_m . u + b_m)`` with
    ``w_m ~ N(0, I / bandwidth**2)``, ``b_m ~ U(0, 2 pi)`` and ``a_m ~ N(0, 1)``,
    whose covariance converges to ``exp(-|u - u'|^2 / (2 bandwidth^2))``.
    """

    def __init__(self, omega, phase, weights):
        self.omega = np.asarray(omega, dtype=float)  # (M, k)
        self.phase = np.asarray(phase, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self._norm = np.sqrt(2.0 / len(self.weights))

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def _chunks(self, U):
        # torch's vectorised float64 cos/sin is several times faster than
        # numpy's here; row blocks keep the (rows, M) projection in cache
        import torch

        U = _as_2d(U)
        omega_t = torch.from_numpy(self.omega.T.copy())
        phase = torch.from_numpy(self.phase)
        for start in range(0, U.shape[0], _CHUNK_ROWS):
            block = torch.from_numpy(np.ascontiguousarray(U[start:start + _CHUNK_ROWS]))
            yield start, block @ omega_t + phase

    def __call__(self, U):
        import torch

        w = torch.from_numpy(self.weights)
        out = np.empty(_as_2d(U).shape[0])
        for start, proj in self._chunks(U):
            out[start:start + len(proj)] = (torch.cos(proj) @ w).numpy()
        return self._norm * out

    def grad(self, U):
        import torch

        w = torch.from_numpy(self.weights)
        omega = torch.from_numpy(self.omega)
        out = np.empty((_as_2d(U).shape[0], self.omega.shape[1]))
        for start, proj in self._chunks(U):
            out[start:start + len(proj)] = ((torch.sin(proj) * w) @ omega).numpy()
        return -self._norm * out


def sample_gp_function(bandwidth: float = 1.0, n_features: int = 500,
                       rng=None, dim: int = 1) -> RandomFourierFunction:
    """Draw a deterministic handle for one RBF-kernel GP sample path."""
    if not bandwidth > 0:
        raise ParameterError(f"bandwidth must be > 0, got {bandwidth}")
    if n_features < 1:
        raise ParameterError(f"n_features must be >= 1, got {n_features}")
    if rng is None:
        rng = np.random.default_rng()
    omega = rng.standard_normal((n_features, dim)) / bandwidth
    phase = rng.uniform(0.0, 2.0 * np.pi, n_features)
    weights = rng.standard_normal(n_features)
    return RandomFourierFunction(omega, phase, weights)


def sample_gp_exact(points, bandwidth: float = 1.0, rng=None,
                    jitter: float = 1e-6) -> np.ndarray:
    """Joint GP draw at ``points`` through a Cholesky factor (n <= 2000)."""
    P = _as_2d(points)
    if P.shape[0] > 2000:
        raise ParameterError("exact GP sampling is limited to 2000 points")
    if not bandwidth > 0:
        raise ParameterError(f"bandwidth must be > 0, got {bandwidth}")
    if rng is None:
        rng = np.random.default_rng()
    sq = np.sum((P[:, None, :] - P[None, :, :]) ** 2, axis=-1)
    K = np.exp(-sq / (2.0 * bandwidth**2)) + jitter * np.eye(len(P))
    L = np.linalg.cholesky(K)
    return L @ rng.standard_normal(len(P))


class SigmoidScale:
    """sigma(u) = low + span * sigmoid(w . u + b); bounded below by ``low``."""

    def __init__(self, w, b: float, low: float = 0.5, span: float = 1.5):
        self.w = np.atleast_1d(np.asarray(w, dtype=float))
        self.b = float(b)
        self.low = float(low)
        self.span = float(span)

    @property
    def lower_bound(self) -> float:
        return self.low

    def __call__(self, U):
        return self.low + self.span * special.expit(_as_2d(U) @ self.w + self.b)

    def grad(self, U):
        s = special.expit(_as_2d(U) @ self.w + self.b)
        return (self.span * s * (1.0 - s))[:, None] * self.w[None, :]


def sample_sigmoid_scale(dim: int, rng, low: float = 0.5, span: float = 1.5,
                         limit: float = 2.0) -> SigmoidScale:
    w = rng.uniform(-limit, limit, dim)
    b = rng.uniform(-limit, limit)
    return SigmoidScale(w, b, low=low, span=span)


class InvertibleSigmoid:
    """f(x) = a * sigmoid(b * x + c) + e for scalar x, with a, b nonzero."""

    def __init__(self, a: float, b: float, c: float, e: float):
        if a == 0 or b == 0:
            raise ParameterError("a and b must be nonzero for an invertible sigmoid")
        self.a, self.b, self.c, self.e = map(float, (a, b, c, e))

    def __call__(self, U):
        return self.a * special.expit(self.b * _as_2d(U)[:, 0] + self.c) + self.e

    def grad(self, U):
        s = special.expit(self.b * _as_2d(U)[:, 0] + self.c)
        return (self.a * self.b * s * (1.0 - s))[:, None]


def sample_invertible_sigmoid(rng) -> InvertibleSigmoid:
    a = rng.uniform(1.0, 3.0) * rng.choice([-1.0, 1.0])
    b = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    return InvertibleSigmoid(a, b, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))


class ClippedAbs:
    """sigma(x) = max(|x|, floor); the floor keeps the scale away from zero."""

    def __init__(self, floor: float = 0.1):
        if not floor > 0:
            raise ParameterError("floor must be > 0")
        self.floor = float(floor)

    @property
    def lower_bound(self) -> float:
        return self.floor

    def __call__(self, U):
        return np.maximum(np.abs(_as_2d(U)[:, 0]), self.floor)

    def grad(self, U):
        x = _as_2d(U)[:, 0]
        return np.where(np.abs(x) > self.floor, np.sign(x), 0.0)[:, None]


class Polynomial:
    """Scalar polynomial, coefficients in increasing degree order."""

    def __init__(self, coefs):
        self.poly = np.polynomial.Polynomial(np.asarray(coefs, dtype=float))
        self._deriv = self.poly.deriv()

    def __call__(self, U):
        return self.poly(_as_2d(U)[:, 0])

    def grad(self, U):
        return self._deriv(_as_2d(U)[:, 0])[:, None]

    def derivative(self, x):
        return self._deriv(np.asarray(x, dtype=float))


class Scaled:
    """``factor * inner``; used for the lambda-scaled effect in triangular models."""

    def __init__(self, inner, factor: float):
        self.inner = inner
        self.factor = float(factor)

    def __call__(self, U):
        return self.factor * self.inner(U)

    def grad(self, U):
        return self.factor * self.inner.grad(U)
