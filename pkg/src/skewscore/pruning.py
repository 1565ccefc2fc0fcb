"""Kernel conditional-independence test and order-based edge pruning."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats
from scipy.spatial.distance import pdist, squareform

from ._validation import NumericError, ParameterError, check_data, check_rng
from .datagen import Dag
from .score.stein import median_heuristic_bandwidth


@dataclass(frozen=True)
class KciResult:
    statistic: float
    p_value: float
    n: int


def _standardize(A):
    A = np.asarray(A, dtype=float)
    sd = A.std(axis=0)
    sd[sd == 0] = 1.0
    return (A - A.mean(axis=0)) / sd


def _centered_rbf(A, bandwidth):
    h = median_heuristic_bandwidth(A) if bandwidth == "median" else float(bandwidth)
    K = np.exp(-squareform(pdist(A, "sqeuclidean")) / (2.0 * h * h))
    # H K H without forming H
    row = K.mean(axis=0)
    return K - row[None, :] - row[:, None] + row.mean()


def _gamma_pvalue(stat, mean, var):
    if mean <= 0 or var <= 0:
        return 1.0
    shape = mean * mean / var
    scale = var / mean
    return float(stats.gamma.sf(stat, shape, scale=scale))


def kci_test(x, y, z=None, *, bandwidth="median", epsilon: float = 1e-3,
             null: str = "gamma", n_perm: int = 500, rng=None) -> KciResult:
    """Kernel (conditional) independence test of ``x`` and ``y`` given ``z``.

    Columns are standardized and RBF bandwidths set per block. Without ``z``
    the statistic is ``trace(Kx Ky) / n`` on centered Grams; with ``z`` both
    Grams (of ``(x, z)`` and of ``y``) are first residualized by
    ``R = epsilon (Kz + epsilon I)^-1``. The null is a two-moment gamma fit.

    Parameters
    ----------
    null : {"gamma", "permutation"}
        "permutation" (unconditional only) shuffles ``y`` ``n_perm`` times.
    """
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    y = np.asarray(y, dtype=float).reshape(len(y), -1)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ParameterError("x and y must have the same length")
    if z is not None:
        z = np.asarray(z, dtype=float).reshape(n, -1)
        if z.shape[1] == 0:
            z = None
    if z is not None and z.shape[1] >= n:
        raise ParameterError(f"conditioning set of size {z.shape[1]} needs more than {n} samples")
    for name, a in (("x", x), ("y", y), ("z", z)):
        if a is not None and not np.all(np.isfinite(a)):
            raise ParameterError(f"{name} contains non-finite values")

    x, y = _standardize(x), _standardize(y)
    if z is None:
        Kx = _centered_rbf(x, bandwidth)
        Ky = _centered_rbf(y, bandwidth)
        stat = float(np.sum(Kx * Ky)) / n
        if null == "permutation":
            rng = check_rng(rng)
            hits = 0
            for _ in range(n_perm):
                p = rng.permutation(n)
                hits += np.sum(Kx * Ky[np.ix_(p, p)]) / n >= stat
            return KciResult(stat, (hits + 1) / (n_perm + 1), n)
        if null != "gamma":
            raise ParameterError(f"unknown null {null!r}")
        mean = np.trace(Kx) * np.trace(Ky) / n**2
        var = 2.0 * np.sum(Kx * Kx) * np.sum(Ky * Ky) / n**4
        return KciResult(stat, _gamma_pvalue(stat, mean, var), n)

    if null != "gamma":
        raise ParameterError("only the gamma null is available for conditional tests")
    z = _standardize(z)
    Kxz = _centered_rbf(np.hstack([x, z]), bandwidth)
    Ky = _centered_rbf(y, bandwidth)
    Kz = _centered_rbf(z, bandwidth)
    try:
        # R = eps (Kz + eps I)^-1 is symmetric
        R = epsilon * linalg.inv(Kz + epsilon * np.eye(n), check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericError(f"conditional residualizer is singular: {exc}") from exc
    KxR = R @ Kxz @ R
    KyR = R @ Ky @ R
    W = KxR * KyR
    stat = float(W.sum()) / n
    mean = float(np.trace(W)) / n
    var = 2.0 * float(np.sum(W * W)) / n**2
    return KciResult(stat, _gamma_pvalue(stat, mean, var), n)


@dataclass
class PruneResult:
    dag: Dag
    p_values: dict

    def p_values_json(self) -> str:
        rows = [{"source": int(i), "target": int(j), "p_value": float(p)}
                for (i, j), p in sorted(self.p_values.items())]
        return json.dumps(rows, indent=2) + "\n"


def prune(X, order, alpha: float = 0.05, subsample_cap: int = 1000, rng=0, **kci_params) -> PruneResult:
    """Keep ``order[i] -> order[j]`` (i < j) when the CI test given the other
    predecessors of ``order[j]`` rejects at level ``alpha``.

    Rows are subsampled (without replacement) to ``subsample_cap`` first.
    Runs exactly ``d (d - 1) / 2`` tests.
    """
    X = check_data(X)
    n, d = X.shape
    order = [int(i) for i in order]
    if sorted(order) != list(range(d)):
        raise ParameterError(f"order {order} is not a permutation of {d} columns")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    rng = check_rng(rng)
    if subsample_cap and n > subsample_cap:
        X = X[np.sort(rng.choice(n, subsample_cap, replace=False))]
    adj = np.zeros((d, d), dtype=np.int64)
    pvals = {}
    for j in range(1, d):
        for i in range(j):
            a, b = order[i], order[j]
            cond = [order[k] for k in range(j) if k != i]
            try:
                res = kci_test(X[:, a], X[:, b], X[:, cond] if cond else None, **kci_params)
            except (ParameterError, NumericError) as exc:
                raise type(exc)(f"edge {a} -> {b}: {exc}") from exc
            pvals[(a, b)] = res.p_value
            if res.p_value < alpha:
                adj[a, b] = 1
    return PruneResult(Dag(adj), pvals)
