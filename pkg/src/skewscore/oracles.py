"""Closed-form and quadrature ground truths for score skewness.

Everything here is independent of the estimators: values come from closed
forms, Gauss-Hermite or trapezoid quadrature, or Monte Carlo on exact scores.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from ._validation import NumericError, ParameterError, check_rng
from .mechanisms import Constant, NoiseSpec, Polynomial
from .score.analytic import (BivariateModelSpec, analytic_score_bivariate,
                             triangular_gaussian_spec)

SQRT_2PI = float(np.sqrt(2.0 * np.pi))
UNIDENTIFIABLE_TOL = 1e-4


@dataclass(frozen=True)
class QuadratureConfig:
    """How one-dimensional Gaussian-weighted integrals are evaluated.

    Parameters
    ----------
    scheme : {"gauss_hermite", "adaptive_trapezoid"}
    n_nodes : int
        Gauss-Hermite nodes, or initial trapezoid points per axis.
    bounds : (float, float)
        Truncation interval in standardized units (trapezoid only).
    tol : float
        Relative change allowed when the node count is doubled.
    max_doublings : int
    """

    scheme: str = "gauss_hermite"
    n_nodes: int = 64
    bounds: tuple = (-12.0, 12.0)
    tol: float = 1e-6
    max_doublings: int = 8

    def __post_init__(self):
        if self.scheme not in ("gauss_hermite", "adaptive_trapezoid"):
            raise ParameterError(f"unknown quadrature scheme {self.scheme!r}")
        if self.n_nodes < 16:
            raise ParameterError("quadrature needs at least 16 nodes")
        if not self.tol > 0:
            raise ParameterError("quadrature tolerance must be > 0")
        lo, hi = self.bounds
        if not lo < hi:
            raise ParameterError("quadrature bounds must be increasing")


def _rule(quad: QuadratureConfig, n: int):
    """Nodes and weights for ``E[g(T)]`` with ``T ~ N(0, 1)``."""
    if quad.scheme == "gauss_hermite":
        t, w = hermegauss(n)
        return t, w / SQRT_2PI
    lo, hi = quad.bounds
    t = np.linspace(lo, hi, n)
    w = np.full(n, (hi - lo) / (n - 1))
    w[[0, -1]] *= 0.5
    return t, w * np.exp(-0.5 * t * t) / SQRT_2PI


def _converged(evaluate, quad: QuadratureConfig):
    """Evaluate at ``n`` and ``2n`` nodes until successive values agree."""
    n = quad.n_nodes
    prev = evaluate(n)
    for _ in range(quad.max_doublings):
        n *= 2
        cur = evaluate(n)
        resid = abs(cur - prev)
        if not np.isfinite(cur):
            raise NumericError(f"quadrature produced a non-finite value at {n} nodes")
        if resid <= quad.tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise NumericError(
        f"quadrature did not converge: change {resid:.3g} at {n} nodes exceeds tolerance {quad.tol:.3g}")


def gaussian_expectation(g, quad: QuadratureConfig | None = None, scale: float = 1.0) -> float:
    """``E[g(X)]`` for ``X ~ N(0, scale^2)`` with a node-doubling convergence check."""
    quad = quad or QuadratureConfig()

    def ev(n):
        t, w = _rule(quad, n)
        return float(np.sum(w * g(scale * t)))

    return _converged(ev, quad)


# -- closed forms -----------------------------------------------------------

def skewscore_gumbel(beta: float) -> float:
    """Skewness of the score of a Gumbel law with scale ``beta``: ``2 / beta^3``."""
    if not beta > 0:
        raise ParameterError(f"Gumbel scale must be > 0, got {beta}")
    return 2.0 / beta**3


def skewscore_gamma(k: float, theta: float) -> float:
    """Skewness of the score of a Gamma(k, theta) law: ``4 / (theta^3 (k - 3)(k - 2))``."""
    if not k > 3:
        raise ParameterError(f"the third moment of the Gamma score diverges for k <= 3, got k={k}")
    if not theta > 0:
        raise ParameterError(f"Gamma scale must be > 0, got {theta}")
    return 4.0 / (theta**3 * (k - 3.0) * (k - 2.0))


def _centered_cube(s):
    c = s - s.mean(axis=0)
    return np.mean(c * c * c, axis=0)


def _bootstrap_se(S, n_boot, rng):
    """Bootstrap SE of the centered cube for every column of ``S`` at once.

    Each resample is represented by its multiplicity counts, so the three
    raw moments it needs come from one matrix product.
    """
    n, k = S.shape
    C = S - S.mean(axis=0)  # shift invariant; keeps raw moments well scaled
    powers = np.concatenate([C, C * C, C * C * C], axis=1)
    reps = np.empty((n_boot, k))
    for b in range(n_boot):
        counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
        m1, m2, m3 = np.split(counts @ powers / n, 3)
        reps[b] = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    return reps.std(axis=0, ddof=1)


def mc_skewscore_gumbel(beta: float, n: int = 10**6, rng=0, n_boot: int = 100):
    """Monte Carlo ``(|E[s^3]|, SE)`` for the score of Gumbel(0, beta)."""
    rng = check_rng(rng)
    spec = NoiseSpec("gumbel", beta, centered=False)
    s = spec.score(spec.sample(rng, n))[:, None]
    return float(abs(_centered_cube(s)[0])), float(_bootstrap_se(s, n_boot, rng)[0])


def mc_skewscore_gamma(k: float, theta: float, n: int = 10**6, rng=0, n_boot: int = 100):
    """Monte Carlo ``(|E[s^3]|, SE)`` for the score ``(k - 1)/x - 1/theta`` of Gamma(k, theta)."""
    rng = check_rng(rng)
    x = rng.gamma(k, theta, n)
    s = ((k - 1.0) / x - 1.0 / theta)[:, None]
    return float(abs(_centered_cube(s)[0])), float(_bootstrap_se(s, n_boot, rng)[0])


# -- confounded additive noise ------------------------------------------------

def confounded_anm_skew_x(f_prime, quad: QuadratureConfig | None = None):
    """Stated closed form for the cause-side skew of the Gaussian confounded ANM.

    Returns ``((2 sqrt(2 pi) / pi) |int x f'(x)(1 + f'(x)) exp(-x^2/2) dx|, 0.0)``.
    The second entry is the effect-side skew, which vanishes identically.
    This expression is twice the true skew for quadratic ``f`` and does not
    vanish at the slope it is claimed to; see :func:`confounded_gaussian_skew_x`
    for the value of the generating model.
    """

    def g(x):
        fp = np.asarray(f_prime(x), dtype=float)
        return x * fp * (1.0 + fp)

    integral = SQRT_2PI * gaussian_expectation(g, quad)
    return 2.0 * SQRT_2PI / np.pi * abs(integral), 0.0


def confounded_gaussian_skew_x(f_prime, quad: QuadratureConfig | None = None) -> float:
    """Cause-side skew of ``X = Z + N0``, ``Y = Z + f(X) + N1`` with standard normals.

    The observed law is ``X ~ N(0, 2)`` and ``Y | X ~ N(f(x) + x/2, 3/2)``, which
    gives ``E[s_x^3] = -E[X (f'(X) + 1/2)^2]``.
    """

    def g(x):
        fp = np.asarray(f_prime(x), dtype=float)
        return x * (fp + 0.5) ** 2

    return abs(gaussian_expectation(g, quad, scale=np.sqrt(2.0)))


# -- identifiability criterion ----------------------------------------------

def _tensor_expectation(spec: BivariateModelSpec, h, quad: QuadratureConfig):
    """``E[h(x, u)]`` under ``x ~ p_x`` and ``u ~ p_n`` by tensor quadrature.

    Each axis uses a Gaussian reference of matching scale and the density
    ratio as an importance weight, which is exact for Gaussian laws.
    """
    cx, cn = spec.cause, spec.noise

    def ev(n):
        t, w = _rule(quad, n)
        x = cx.scale * t
        u = cn.scale * t
        ref = -0.5 * t * t - np.log(SQRT_2PI)
        wx = w * np.exp(cx.logpdf(x) + np.log(cx.scale) - ref)
        wu = w * np.exp(cn.logpdf(u) + np.log(cn.scale) - ref)
        H = h(x, u)
        return float(wx @ H @ wu)

    return _converged(ev, quad)


def assumption1_lhs(spec: BivariateModelSpec, quad: QuadratureConfig | None = None) -> float:
    """Signed identifiability criterion ``E[P^3 + 3 (B s_n)^2 P]``, ``P = A - C sigma u s_n``.

    ``A = (log p_x)' - sigma'/sigma``, ``B = -f'/sigma``, ``C = sigma'/sigma^2``
    and ``s_n`` is the noise score at ``u``, so ``sigma u`` is the residual
    ``y - f(x)``. This is the third moment of the cause coordinate of the
    joint score. A value within
    :data:`UNIDENTIFIABLE_TOL` of zero flags the model as not identified by
    the criterion.
    """
    quad = quad or QuadratureConfig()

    def h(x, u):
        A, B, C, sig = spec.parts(x)
        sn = spec.noise.score(u)
        P = A[:, None] - (C * sig)[:, None] * (u * sn)[None, :]
        Bs = B[:, None] * sn[None, :]
        return P**3 + 3.0 * Bs * Bs * P

    return _tensor_expectation(spec, h, quad)


def is_identifiable(spec: BivariateModelSpec, quad: QuadratureConfig | None = None,
                    tol: float = UNIDENTIFIABLE_TOL) -> bool:
    return abs(assumption1_lhs(spec, quad)) >= tol


# -- Monte Carlo on exact scores ----------------------------------------------

@dataclass(frozen=True)
class SkewPair:
    skew_x: float
    skew_y: float
    se_x: float
    se_y: float
    signed_x: float
    signed_y: float

    @property
    def margin(self) -> float:
        return self.skew_x - self.skew_y


def mc_skew_pair(spec: BivariateModelSpec, n: int = 10**6, rng=0, n_boot: int = 100) -> SkewPair:
    """Centered-cube skew of both exact score coordinates on ``n`` model draws.

    Standard errors are bootstrap SEs of the signed statistics.
    """
    if n < 2:
        raise ParameterError("mc_skew_pair needs n >= 2")
    rng = check_rng(rng)
    P = spec.sample(rng, n)
    S = analytic_score_bivariate(spec, P, check=False)
    m = _centered_cube(S)
    se = _bootstrap_se(S, n_boot, rng)
    return SkewPair(float(abs(m[0])), float(abs(m[1])), float(se[0]), float(se[1]),
                    float(m[0]), float(m[1]))


def quadratic_confounded_spec(coefs=(0.0, 0.0, 1.0), lam: float = 1.0) -> BivariateModelSpec:
    """Observed law of ``X = Z + N0``, ``Y = Z + lam f(X) + N1`` for polynomial ``f``."""
    return triangular_gaussian_spec(lam, Polynomial(coefs), Constant(1.0))


# -- conformance --------------------------------------------------------------

@dataclass
class Check:
    name: str
    expected: float
    observed: float
    tolerance: float
    passed: bool
    note: str = ""


def _abs_check(name, expected, observed, tol, note=""):
    return Check(name, float(expected), float(observed), float(tol),
                 bool(abs(observed - expected) <= tol), note)


def _rel_check(name, expected, observed, rel, se=0.0, note=""):
    tol = max(rel * abs(expected), 3.0 * se)
    return _abs_check(name, expected, observed, tol, note)


def conformance_report(seed: int = 0, mc_samples: int = 10**6) -> dict:
    """Evaluate every oracle example; returns a JSON-ready dict.

    ``checks`` are assertions. ``discrepancies`` record stated values that the
    underlying model does not reproduce; they are reported, not asserted.
    """
    quad = QuadratureConfig()
    checks: list[Check] = []
    disc: list[Check] = []

    checks.append(_abs_check("gumbel_beta1", 2.0, skewscore_gumbel(1.0), 0.0))
    checks.append(_abs_check("gumbel_beta2", 0.25, skewscore_gumbel(2.0), 0.0))
    v, se = mc_skewscore_gumbel(1.0, mc_samples, seed)
    checks.append(_rel_check("gumbel_beta1_monte_carlo", 2.0, v, 0.05))
    checks.append(_abs_check("gamma_k5_theta1", 2.0 / 3.0, skewscore_gamma(5.0, 1.0), 1e-15))
    checks.append(_abs_check("gamma_k4_theta2", 0.25, skewscore_gamma(4.0, 2.0), 1e-15))
    v, se = mc_skewscore_gamma(6.0, 1.0, mc_samples, seed)
    checks.append(_rel_check("gamma_k6_theta1_monte_carlo", skewscore_gamma(6.0, 1.0), v, 0.05))

    lin = Polynomial([0.3, 1.7]).derivative
    quadratic = Polynomial([0.0, 0.0, 1.0]).derivative
    checks.append(_abs_check("confounded_anm_linear", 0.0, confounded_anm_skew_x(lin, quad)[0], 1e-6))
    checks.append(_abs_check("confounded_anm_square", 8.0, confounded_anm_skew_x(quadratic, quad)[0], 1e-6))
    checks.append(_abs_check("confounded_anm_effect_side", 0.0, confounded_anm_skew_x(quadratic, quad)[1], 0.0))
    half = Polynomial([0.2, 0.5, 1.0]).derivative
    disc.append(_abs_check("confounded_anm_slope_plus_half", 0.0, confounded_anm_skew_x(half, quad)[0], 1e-6,
                           "closed form vanishes at slope -1/2, not +1/2"))
    minus_half = Polynomial([0.2, -0.5, 1.0]).derivative
    checks.append(_abs_check("confounded_model_slope_minus_half", 0.0,
                             confounded_gaussian_skew_x(minus_half, quad), 1e-6))

    spec_sq = quadratic_confounded_spec()
    pair = mc_skew_pair(spec_sq, mc_samples, seed)
    disc.append(_rel_check("square_monte_carlo_vs_closed_form", 8.0, pair.skew_x, 0.05, note=
                           "sampled model has cause-side skew 4"))
    exact = confounded_gaussian_skew_x(quadratic, quad)
    checks.append(_rel_check("square_monte_carlo_vs_model_quadrature", exact, pair.skew_x, 0.05, pair.se_x))
    checks.append(_abs_check("square_effect_side_null", 0.0, pair.skew_y, 3.0 * pair.se_y))

    gl = BivariateModelSpec(NoiseSpec(), NoiseSpec(), Polynomial([0.5, 1.3]), Constant(1.0))
    checks.append(_abs_check("criterion_gaussian_linear", 0.0, assumption1_lhs(gl, quad), UNIDENTIFIABLE_TOL))
    null = BivariateModelSpec(NoiseSpec(), NoiseSpec(), Polynomial([0.0]), Constant(1.0))
    checks.append(_abs_check("criterion_independent", 0.0, assumption1_lhs(null, quad), UNIDENTIFIABLE_TOL))
    lhs = assumption1_lhs(spec_sq, quad)
    checks.append(Check("criterion_confounded_square_nonzero", 1e-3, lhs, 1e-3, abs(lhs) > 1e-3))
    checks.append(_abs_check("criterion_matches_model_skew", exact, abs(lhs), 1e-8))

    margins = []
    for lam in (0.5, 1.0, 2.0, 4.0, 8.0):
        margins.append(abs(assumption1_lhs(quadratic_confounded_spec(lam=lam), quad)))
    grows = all(b > a for a, b in zip(margins, margins[1:])) and margins[0] > 0
    checks.append(Check("lambda_sweep_margin_grows", 0.0, float(margins[-1] - margins[0]), 0.0, grows,
                        "margins " + ", ".join(f"{m:.6g}" for m in margins)))

    return {
        "seed": seed,
        "mc_samples": mc_samples,
        "checks": [asdict(c) for c in checks],
        "discrepancies": [asdict(c) for c in disc],
        "passed": all(c.passed for c in checks),
    }


def conformance_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
