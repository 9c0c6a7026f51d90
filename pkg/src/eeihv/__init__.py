"""Stochastic multi-objective Bayesian optimization with the denoised expected
hypervolume improvement and Vorob'ev summaries of random attained sets."""

from .acquisition import DenoisedEihv, eeihv_bar, eihv_exact, maximize_eeihv
from .attainment import empirical_attainment, sample_fronts, symmetric_deviation, vorobev
from .benchmarks import ground_truth, make_objective, synthetic_2d, synthetic_6d
from .core import BoxBounds, Dataset, Dominance, dominates, standardize
from .gp import GpModel, Hyperparams, log_marginal_likelihood, matern32, train
from .loop import LoopConfig, RunState, run
from .pareto import hypervolume2d, pareto_filter

__version__ = "0.1.0"

__all__ = [
    "BoxBounds",
    "Dataset",
    "DenoisedEihv",
    "Dominance",
    "GpModel",
    "Hyperparams",
    "LoopConfig",
    "RunState",
    "dominates",
    "eeihv_bar",
    "eihv_exact",
    "empirical_attainment",
    "ground_truth",
    "hypervolume2d",
    "log_marginal_likelihood",
    "make_objective",
    "matern32",
    "maximize_eeihv",
    "pareto_filter",
    "run",
    "sample_fronts",
    "standardize",
    "symmetric_deviation",
    "synthetic_2d",
    "synthetic_6d",
    "train",
    "vorobev",
]
