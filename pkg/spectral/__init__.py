"""Eigenvalue oracles: constraint feasibility, generalized eigenvalues, constrained norms."""

from .oracles import (
    KERNEL_TOLERANCE,
    FeasibilityContext,
    SpectralError,
    constrained_opnorm,
    feasibility_tolerance,
    is_feasible,
    max_generalized_eig,
    min_eig_constraint,
)

__all__ = [
    'KERNEL_TOLERANCE',
    'FeasibilityContext',
    'SpectralError',
    'constrained_opnorm',
    'feasibility_tolerance',
    'is_feasible',
    'max_generalized_eig',
    'min_eig_constraint',
]
