"""Ridge-regression zero-shot learning with hubness measurement and reduction."""
__version__ = "0.1.0"

from .evaluation import (
    EvalReport,
    MethodSpec,
    average_precision,
    calibrate_lambda,
    mean_average_precision,
    run_experiment,
    top_k_accuracy,
)
from .hubness import HubnessReport, hubness_report, nk_counts, skewness
from .neighbors import DissimilarityMatrix, Ranking, nicdm, pairwise_euclidean, rank_all
from .regression import Direction, RidgeModel, center, fit_ridge, predict, spectral_norm

__all__ = [
    "Direction",
    "DissimilarityMatrix",
    "EvalReport",
    "HubnessReport",
    "MethodSpec",
    "Ranking",
    "RidgeModel",
    "average_precision",
    "calibrate_lambda",
    "center",
    "fit_ridge",
    "hubness_report",
    "mean_average_precision",
    "nicdm",
    "nk_counts",
    "pairwise_euclidean",
    "predict",
    "rank_all",
    "run_experiment",
    "skewness",
    "spectral_norm",
    "top_k_accuracy",
]
