"""Semidefinite upper bound on the local worst-case error and its sampled counterpart."""

from .bound import CurvePoint, LwceBoundResult, LwceProblem, lwce_curve, lwce_gamma, lwce_upper_bound
from .sampling import enclosing_ball_center, sample_feasible_signals, sampled_lwce

__all__ = [
    'CurvePoint',
    'LwceBoundResult',
    'LwceProblem',
    'enclosing_ball_center',
    'lwce_curve',
    'lwce_gamma',
    'lwce_upper_bound',
    'sample_feasible_signals',
    'sampled_lwce',
]
