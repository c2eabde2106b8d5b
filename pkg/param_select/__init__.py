"""Regularization parameter selection and worst-case error evaluation."""

from .functional import FunctionalEstimate, estimate_functional
from .global_select import GlobalSolution, InfeasibleProgramError, solve_global, verify_on_grid, wide_grid_optimum
from .gwce import evaluate_gwce_linear, gwce_split_bound
from .local_select import LocalSolution, balance_function, minimax_objective, solve_local

__all__ = [
    'FunctionalEstimate',
    'GlobalSolution',
    'InfeasibleProgramError',
    'LocalSolution',
    'balance_function',
    'estimate_functional',
    'evaluate_gwce_linear',
    'gwce_split_bound',
    'minimax_objective',
    'solve_global',
    'solve_local',
    'verify_on_grid',
    'wide_grid_optimum',
]
