"""End-to-end discovery: skewness ordering followed by CI pruning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import ParameterError, check_data
from .ordering import topological_order
from .pruning import prune
from .score.ssm import SlicedScoreMatching
from .score.stein import ORDERING_PARAMS, SteinScoreEstimator

ESTIMATORS = ("stein", "ssm")


def make_score_estimator(name: str, random_state=0, **params):
    """Build a named score estimator; extra ``params`` go to its constructor.

    Stein defaults to the ordering profile (half the median bandwidth, ridge
    0.01) rather than the estimator's own defaults.
    """
    if name == "stein":
        return SteinScoreEstimator(**{**ORDERING_PARAMS, **params})
    if name == "ssm":
        return SlicedScoreMatching(random_state=random_state, **params)
    raise ParameterError(f"unknown score estimator {name!r}; expected one of {ESTIMATORS}")


class SkewScore(BaseEstimator):
    """Causal discovery under heteroscedastic symmetric noise.

    The order is built by repeatedly removing the node whose score
    coordinate has the smallest skewness; edges are then kept when a kernel
    CI test given the earlier nodes rejects.

    Parameters
    ----------
    score_estimator : "stein", "ssm" or estimator object
    psi : {"cube", "signed_square", "tanh"}
    alpha : float
        CI test level.
    prune : bool
        When False the adjacency is the full DAG implied by the order.
    subsample_cap : int
        Rows kept for the CI tests.
    symmetry_threshold : "bootstrap" or float
    n_boot : int
    random_state : int

    Attributes
    ----------
    order_ : list of int
    adjacency_ : ndarray of shape (d, d)
    diagnostics_ : OrderDiagnostics
    p_values_ : dict mapping (source, target) to a p-value
    """

    def __init__(self, score_estimator="stein", psi="cube", alpha=0.05, prune=True,
                 subsample_cap=1000, symmetry_threshold="bootstrap", n_boot=200,
                 random_state=0):
        self.score_estimator = score_estimator
        self.psi = psi
        self.alpha = alpha
        self.prune = prune
        self.subsample_cap = subsample_cap
        self.symmetry_threshold = symmetry_threshold
        self.n_boot = n_boot
        self.random_state = random_state

    def _score_estimator(self):
        if isinstance(self.score_estimator, str):
            return make_score_estimator(self.score_estimator, self.random_state)
        return self.score_estimator

    def fit(self, X, y=None):
        X = check_data(X, min_samples=2)
        d = X.shape[1]
        self.order_, self.diagnostics_ = topological_order(
            X, self._score_estimator(), self.psi, self.symmetry_threshold,
            self.n_boot, self.random_state)
        if self.prune and d > 1:
            res = prune(X, self.order_, self.alpha, self.subsample_cap, self.random_state)
            self.adjacency_ = res.dag.adj
            self.p_values_ = res.p_values
        else:
            adj = np.zeros((d, d), dtype=np.int64)
            for j in range(d):
                for i in range(j):
                    adj[self.order_[i], self.order_[j]] = 1
            self.adjacency_ = adj
            self.p_values_ = {}
        self.n_features_in_ = d
        return self

    def predict(self, X=None):
        """Return the fitted adjacency matrix."""
        check_is_fitted(self, "adjacency_")
        return self.adjacency_.copy()

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()
