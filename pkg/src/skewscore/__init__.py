"""Causal discovery from the skewness of the score under heteroscedastic symmetric noise."""

from ._validation import DataError, NumericError, ParameterError
from .config import RunConfig
from .datagen import Dag, sample_er_dag, sample_hsnm, synthesize
from .estimator import SkewScore, make_score_estimator
from .metrics import direction_accuracy, order_divergence, shd
from .ordering import OddTestFunction, OrderDiagnostics, OrderingError, topological_order
from .pruning import kci_test, prune
from .score import AnalyticScore, SlicedScoreMatching, SteinScoreEstimator

__all__ = [
    "AnalyticScore", "Dag", "DataError", "NumericError", "OddTestFunction", "OrderDiagnostics",
    "OrderingError", "ParameterError", "RunConfig", "SkewScore", "SlicedScoreMatching",
    "SteinScoreEstimator", "direction_accuracy", "kci_test", "make_score_estimator",
    "order_divergence", "prune", "sample_er_dag", "sample_hsnm", "shd", "synthesize",
    "topological_order",
]
__version__ = "0.1.0"
