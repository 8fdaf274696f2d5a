"""Constrained online prediction by minimax histogram-based aggregation."""
from .core import (ConfigError, DecisionSet, LossSpec, LossSpecError, ObservationRangeError,
                   ProblemGeometry, lagrangian, project_decision, regularized_lagrangian)
from .losses import make_loss_spec
from .oracle import check_complementary_slackness, solve_feasible_optimum
from .processes import ProcessSpec, generate, stationary_law
from .strategy import MHA

__all__ = [
    "ConfigError", "DecisionSet", "LossSpec", "LossSpecError", "ObservationRangeError",
    "ProblemGeometry", "lagrangian", "project_decision", "regularized_lagrangian",
    "make_loss_spec", "check_complementary_slackness", "solve_feasible_optimum",
    "ProcessSpec", "generate", "stationary_law", "MHA",
]
__version__ = "0.1.0"
