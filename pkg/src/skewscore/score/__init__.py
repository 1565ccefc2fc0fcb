"""Score (grad log density) estimators."""

from .analytic import AnalyticScore, BivariateModelSpec, analytic_score_bivariate, hsnm_score
from .ssm import SlicedScoreMatching, TrainingError, estimate_score_ssm
from .stein import SteinScoreEstimator, estimate_score_stein, median_heuristic_bandwidth

__all__ = [
    "AnalyticScore", "BivariateModelSpec", "SlicedScoreMatching", "SteinScoreEstimator",
    "TrainingError", "analytic_score_bivariate", "estimate_score_ssm", "estimate_score_stein",
    "hsnm_score", "median_heuristic_bandwidth",
]
