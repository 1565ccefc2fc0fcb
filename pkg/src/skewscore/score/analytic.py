"""Exact scores for known models, used as the test substrate.

Two independent routes are provided: the bivariate closed form written in
terms of the cause law, the mean and scale functions and the noise law, and a
node-by-node gradient of the HSNM factorization for general DAGs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import NumericError, ParameterError, check_data
from ..mechanisms import NoiseSpec, Scaled


class FunctionPair:
    """Wrap a scalar function and its derivative in the mechanism interface."""

    def __init__(self, fn, dfn):
        self.fn = fn
        self.dfn = dfn

    def __call__(self, U):
        x = np.asarray(U, dtype=float)
        return np.asarray(self.fn(x[:, 0] if x.ndim == 2 else x), dtype=float)

    def grad(self, U):
        x = np.asarray(U, dtype=float)
        x = x[:, 0] if x.ndim == 2 else x
        return np.asarray(self.dfn(x), dtype=float)[:, None] * np.ones((len(x), 1))


class _SqrtAddScale:
    """sqrt(c + sigma(x)^2), the observed conditional scale of a confounded pair."""

    def __init__(self, sigma, c):
        self.sigma = sigma
        self.c = float(c)

    def __call__(self, U):
        return np.sqrt(self.c + self.sigma(U) ** 2)

    def grad(self, U):
        s = self.sigma(U)
        return (s / np.sqrt(self.c + s**2))[:, None] * self.sigma.grad(U)


class _AffineAdd:
    """inner(x) + slope * x."""

    def __init__(self, inner, slope):
        self.inner = inner
        self.slope = float(slope)

    def __call__(self, U):
        x = np.asarray(U, dtype=float)
        return self.inner(U) + self.slope * (x[:, 0] if x.ndim == 2 else x)

    def grad(self, U):
        return self.inner.grad(U) + self.slope


@dataclass
class BivariateModelSpec:
    """Bivariate HSNM ``Y = f(X) + sigma(X) N`` with known ingredients.

    ``cause`` and ``noise`` expose ``logpdf``, ``score`` (derivative of the log
    density) and ``sample``; ``f`` and ``sigma`` expose ``__call__`` and ``grad``.
    """

    cause: NoiseSpec
    noise: NoiseSpec
    f: object
    sigma: object

    def parts(self, x):
        """Return the per-point pieces ``A, B, C`` and the scale at ``x``."""
        X = np.asarray(x, dtype=float)[:, None]
        s = self.sigma(X)
        ds = self.sigma.grad(X)[:, 0]
        df = self.f.grad(X)[:, 0]
        A = self.cause.score(X[:, 0]) - ds / s
        B = -df / s
        C = ds / s**2
        return A, B, C, s

    def standardized_noise(self, points):
        P = np.asarray(points, dtype=float)
        x = P[:, 0]
        return (P[:, 1] - self.f(x[:, None])) / self.sigma(x[:, None])

    def sample(self, rng, n):
        x = self.cause.sample(rng, n)
        u = self.noise.sample(rng, n)
        X = x[:, None]
        return np.column_stack([x, self.f(X) + self.sigma(X) * u])

    @classmethod
    def from_scm(cls, scm) -> "BivariateModelSpec":
        if scm.d != 2 or scm.latent is not None or not scm.graph.adj[0, 1]:
            raise ParameterError("need an unconfounded two-node SCM with edge 0 -> 1")
        eff = scm.mechanisms[1]
        return cls(scm.mechanisms[0].noise, eff.noise, eff.f, eff.sigma)


def triangular_gaussian_spec(lam, f_tilde, sigma, *, phi=(1.0, 1.0), s0=1.0, s1=1.0):
    """Observed law of the Gaussian latent-confounded triangle as an HSNM.

    With ``X = a0 Z + N0`` and ``Y = lam f~(X) + a1 Z + sigma(X) N1`` where
    ``Z ~ N(0, 1)``, ``N0 ~ N(0, s0^2)`` and ``N1 ~ N(0, s1^2)``, marginalizing Z
    gives ``X ~ N(0, a0^2 + s0^2)`` and a Gaussian ``Y | X`` with mean
    ``lam f~(x) + a1 a0 x / v`` and variance ``a1^2 s0^2 / v + s1^2 sigma(x)^2``.
    """
    a0, a1 = map(float, phi)
    v = a0**2 + s0**2
    cause = NoiseSpec("gaussian", float(np.sqrt(v)))
    f_eff = _AffineAdd(Scaled(f_tilde, lam), a1 * a0 / v)
    scale = Scaled(sigma, s1) if s1 != 1.0 else sigma
    s_eff = _SqrtAddScale(scale, a1**2 * s0**2 / v)
    return BivariateModelSpec(cause, NoiseSpec("gaussian", 1.0), f_eff, s_eff)


def _check_positive(spec, points, u):
    lx = spec.cause.logpdf(points[:, 0])
    lu = spec.noise.logpdf(u)
    # a density below the smallest normal double is treated as zero
    floor = np.log(np.finfo(float).tiny)
    bad = ~((lx > floor) & (lu > floor))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"density underflow at point {i}: {points[i].tolist()}")


def analytic_score_bivariate(spec: BivariateModelSpec, points, check=True) -> np.ndarray:
    """Exact ``grad log p(x, y)`` for a bivariate HSNM.

    ``d/dx = A + B s_n(u) - C (y - f(x)) s_n(u)`` and ``d/dy = s_n(u) / sigma(x)``
    with ``u = (y - f(x)) / sigma(x)`` and ``s_n`` the noise score.
    """
    P = check_data(points)
    if P.shape[1] != 2:
        raise ParameterError("points must have two columns")
    u = spec.standardized_noise(P)
    if check:
        _check_positive(spec, P, u)
    A, B, C, s = spec.parts(P[:, 0])
    sn = spec.noise.score(u)
    return np.column_stack([A + B * sn - C * s * u * sn, sn / s])


def log_density_bivariate(spec: BivariateModelSpec, points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    x = P[:, :1]
    s = spec.sigma(x)
    return spec.cause.logpdf(P[:, 0]) - np.log(s) + spec.noise.logpdf((P[:, 1] - spec.f(x)) / s)


def conditional_score_y(spec: BivariateModelSpec, points) -> np.ndarray:
    """``d/dy log p(y | x)`` from the conditional density alone."""
    P = np.asarray(points, dtype=float)
    x = P[:, :1]
    s = spec.sigma(x)
    return spec.noise.score((P[:, 1] - spec.f(x)) / s) / s


# -- general DAG ------------------------------------------------------------

def hsnm_log_density(scm, X) -> np.ndarray:
    """``sum_i log p_Ni(u_i) - log sigma_i`` for an unconfounded SCM."""
    _require_unconfounded(scm)
    X = np.asarray(X, dtype=float)
    out = np.zeros(X.shape[0])
    for i, mech in enumerate(scm.mechanisms):
        if mech.parents:
            U = X[:, list(mech.parents)]
            s = mech.sigma(U)
            out += mech.noise.logpdf((X[:, i] - mech.f(U)) / s) - np.log(s)
        else:
            out += mech.noise.logpdf(X[:, i])
    return out


def hsnm_score(scm, X, nodes=None) -> np.ndarray:
    """Exact score of the marginal over ``nodes`` (default: all nodes).

    ``nodes`` must be ancestrally closed; the marginal then keeps the product
    of the remaining conditionals and its gradient has the usual
    own-term-plus-children form.
    """
    _require_unconfounded(scm)
    X = np.asarray(X, dtype=float)
    d = scm.d
    nodes = list(range(d)) if nodes is None else [int(i) for i in nodes]
    keep = set(nodes)
    for i in nodes:
        if not set(scm.mechanisms[i].parents) <= keep:
            raise ParameterError(f"node set is not ancestral: parent of {i} missing")
    full = np.zeros((X.shape[0], d))
    for i in nodes:
        mech = scm.mechanisms[i]
        if not mech.parents:
            full[:, i] += mech.noise.score(X[:, i])
            continue
        pa = list(mech.parents)
        U = X[:, pa]
        s = mech.sigma(U)
        u = (X[:, i] - mech.f(U)) / s
        sn = mech.noise.score(u)
        full[:, i] += sn / s
        dsig = mech.sigma.grad(U)
        df = mech.f.grad(U)
        # d u / d x_k = -(df_k + u dsig_k) / s ; d(-log s)/d x_k = -dsig_k / s
        contrib = -(sn * 1.0)[:, None] * (df + u[:, None] * dsig) / s[:, None] - dsig / s[:, None]
        full[:, pa] += contrib
    return full[:, nodes]


def _require_unconfounded(scm):
    if scm.latent is not None and scm.latent.n_latent:
        raise ParameterError("analytic HSNM scores need an SCM without latent confounders")


class AnalyticScore(TransformerMixin, BaseEstimator):
    """Oracle "estimator" returning exact scores of a known unconfounded SCM.

    ``fit`` records which SCM nodes the columns correspond to, which lets the
    ordering loop inject the exact marginal score each iteration.
    """

    def __init__(self, scm=None, nodes=None):
        self.scm = scm
        self.nodes = nodes

    def fit(self, X, y=None):
        X = check_data(X)
        self.nodes_ = list(range(X.shape[1])) if self.nodes is None else list(self.nodes)
        if len(self.nodes_) != X.shape[1]:
            raise ParameterError("nodes must match the number of columns")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_data(X)
        full = np.zeros((X.shape[0], self.scm.d))
        full[:, self.nodes_] = X
        return hsnm_score(self.scm, full, self.nodes_)
