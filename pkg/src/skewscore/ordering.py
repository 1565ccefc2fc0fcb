"""Skewness of the score and sink-elimination ordering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, clone

from ._validation import DataError, ParameterError, check_data, check_rng, check_vector

PSI_KINDS = ("cube", "signed_square", "tanh")


@dataclass(frozen=True)
class OddTestFunction:
    """Odd nonlinearity applied to centered scores.

    ``cube``: s**3, ``signed_square``: s * |s|, ``tanh``: tanh(s / tau).
    """

    kind: str = "cube"
    tau: float = 1.0

    def __post_init__(self):
        if self.kind not in PSI_KINDS:
            raise ParameterError(f"unknown odd test function {self.kind!r}")
        if self.kind == "tanh" and not self.tau > 0:
            raise ParameterError("tanh test function needs tau > 0")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cube":
            return s * s * s
        if self.kind == "signed_square":
            return s * np.abs(s)
        return np.tanh(s / self.tau)


def as_psi(psi) -> OddTestFunction:
    if isinstance(psi, OddTestFunction):
        return psi
    if psi is None:
        return OddTestFunction()
    return OddTestFunction(str(psi))


def skew_of_score(column, psi="cube") -> float:
    """``|mean(psi(s - mean(s)))|`` for one score coordinate."""
    s = check_vector(column, name="score column")
    psi = as_psi(psi)
    return float(abs(np.mean(psi(s - s.mean()))))


def skew_vector(scores, psi="cube") -> np.ndarray:
    S = np.asarray(scores, dtype=float)
    if S.ndim != 2 or S.shape[1] == 0:
        raise DataError("scores must be a 2-D array with at least one column")
    if not np.all(np.isfinite(S)):
        raise DataError("scores contain non-finite values")
    psi = as_psi(psi)
    return np.abs(np.mean(psi(S - S.mean(axis=0)), axis=0))


def bootstrap_se(column, psi="cube", n_boot: int = 200, rng=0) -> float:
    """Bootstrap standard error of the signed statistic ``mean(psi(s - mean s))``."""
    s = check_vector(column, name="score column")
    psi = as_psi(psi)
    rng = check_rng(rng)
    n = s.size
    stats = np.empty(n_boot)
    for b in range(n_boot):
        r = s[rng.integers(0, n, n)]
        stats[b] = np.mean(psi(r - r.mean()))
    return float(np.std(stats, ddof=1))


def find_sink(scores, psi="cube"):
    """Index of the least-skewed column (lowest index on ties) and the skew vector."""
    skews = skew_vector(scores, psi)
    return int(np.argmin(skews)), skews


@dataclass
class OrderDiagnostics:
    """Per-iteration record of the sink search.

    ``skews[k]`` maps each remaining node (original index) to its statistic at
    iteration ``k``; ``chosen[k]`` is the node removed then.
    """

    skews: list = field(default_factory=list)
    chosen: list = field(default_factory=list)
    min_skew: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    estimator: str = ""

    @property
    def violation(self) -> bool:
        return any(self.flags)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "iterations": [
                {
                    "iteration": k + 1,
                    "skews": {str(node): float(v) for node, v in self.skews[k].items()},
                    "chosen": int(self.chosen[k]),
                    "min_skew": float(self.min_skew[k]),
                    "threshold": float(self.threshold[k]),
                    "symmetry_violation": bool(self.flags[k]),
                }
                for k in range(len(self.chosen))
            ],
            "symmetry_violation": self.violation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class OrderingError(RuntimeError):
    """Score estimation failed mid-loop; ``diagnostics`` holds the finished iterations."""

    def __init__(self, message, diagnostics, order):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.partial_order = order


def _estimate(estimator, X_sub, nodes):
    if callable(estimator) and not isinstance(estimator, BaseEstimator):
        return np.asarray(estimator(X_sub, nodes), dtype=float)
    est = clone(estimator)
    if "nodes" in est.get_params(deep=False):
        est.set_params(nodes=list(nodes))
    return np.asarray(est.fit_transform(X_sub), dtype=float)


def _describe(estimator) -> str:
    if isinstance(estimator, BaseEstimator):
        return type(estimator).__name__
    return getattr(estimator, "__name__", type(estimator).__name__)


def topological_order(X, estimator, psi="cube", symmetry_threshold="bootstrap",
                      n_boot: int = 200, random_state=0):
    """Order nodes by repeatedly removing the least-skewed score coordinate.

    Parameters
    ----------
    X : array of shape (n, d)
    estimator : score estimator or callable
        Either an sklearn-style object whose ``fit_transform`` returns scores
        at the samples (cloned every iteration, ``nodes`` set when it has
        that parameter) or ``callable(X_sub, nodes) -> scores``.
    psi : OddTestFunction or kind name
    symmetry_threshold : "bootstrap" or float
        An iteration is flagged when its minimum skew exceeds this value;
        "bootstrap" uses three bootstrap standard errors of the chosen column.
    random_state : seed for the bootstrap.

    Returns
    -------
    order : list of int, earliest cause first
    diagnostics : OrderDiagnostics
    """
    X = check_data(X)
    psi = as_psi(psi)
    rng = check_rng(random_state)
    d = X.shape[1]
    remaining = list(range(d))
    order: list[int] = []
    diag = OrderDiagnostics(estimator=_describe(estimator))
    for _ in range(d):
        try:
            scores = _estimate(estimator, X[:, remaining], remaining)
            j, skews = find_sink(scores, psi)
        except Exception as exc:
            raise OrderingError(
                f"score estimation failed with {len(remaining)} nodes left: {exc}",
                diag, [*order]) from exc
        node = remaining[j]
        if symmetry_threshold == "bootstrap":
            thr = 3.0 * bootstrap_se(scores[:, j], psi, n_boot, rng)
        else:
            thr = float(symmetry_threshold)
        diag.skews.append(dict(zip(remaining, skews.tolist())))
        diag.chosen.append(node)
        diag.min_skew.append(float(skews[j]))
        diag.threshold.append(float(thr))
        diag.flags.append(bool(skews[j] > thr))
        order.insert(0, node)
        remaining.pop(j)
    return order, diag
