"""Regularization map, its limits, observations and quantities of interest."""

from .regularization import (
    EpsRule,
    ModelParams,
    Observation,
    QuantityOfInterest,
    RecoveryError,
    apply_qoi,
    harmonic_interpolate,
    harmonic_matrix,
    limit_tau_zero,
    regularization_system,
    regularize,
    regularize_with_limits,
    regularizer_matrix,
    regularizer_matrix_with_limits,
    smoothness_budget,
)

__all__ = [
    'EpsRule',
    'ModelParams',
    'Observation',
    'QuantityOfInterest',
    'RecoveryError',
    'apply_qoi',
    'harmonic_interpolate',
    'harmonic_matrix',
    'limit_tau_zero',
    'regularization_system',
    'regularize',
    'regularize_with_limits',
    'regularizer_matrix',
    'regularizer_matrix_with_limits',
    'smoothness_budget',
]
