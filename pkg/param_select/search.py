"""
One-dimensional searches over t in (0, 1).

Searches run in logit coordinates u = log(t / (1 - t)) so both ends of the
interval get the same resolution: a uniform seed grid in u, then scipy's
golden-section search on the bracket around the best grid point. Ties on
the grid fall back to scipy's bounded search between the neighbours.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

logger = logging.getLogger(__name__)

LOGIT_BOUND = 20.0
GOLDEN_XTOL = 1e-10
GOLDEN_MAXITER = 200


@dataclass(frozen=True)
class SearchResult:
    t: float
    value: float
    refined: bool


def logit_grid(size: int, bound: float = LOGIT_BOUND) -> np.ndarray:
    """`size` points of (0, 1), uniform in logit coordinates."""
    return special.expit(np.linspace(-bound, bound, size))


def minimize_on_unit_interval(
    func: Callable[[float], float],
    grid_size: int,
    bound: float = LOGIT_BOUND,
    xtol: float = GOLDEN_XTOL,
) -> SearchResult:
    """
    Minimize a unimodal function of t in (0, 1).

    Args:
        func: Objective; may return inf where undefined
        grid_size: Number of seed points (at least 3)
        bound: Seed grid covers logit(t) in [-bound, bound]
        xtol: Golden-section tolerance in logit coordinates

    Returns:
        SearchResult with the better of the grid point and the refined point.
        value is inf when func is inf on the whole grid.
    """
    def in_logit(u: float) -> float:
        return func(float(special.expit(u)))

    us = np.linspace(-bound, bound, max(grid_size, 3))
    values = np.array([in_logit(u) for u in us])
    best = int(np.argmin(values))
    best_t, best_value = float(special.expit(us[best])), float(values[best])
    if not np.isfinite(best_value):
        return SearchResult(t=best_t, value=best_value, refined=False)

    if best == 0 or best == len(us) - 1:
        logger.debug(f'Minimum at logit bound {us[best]:.3g}, skipping refinement [SEARCH-GOLDEN01]')
        return SearchResult(t=best_t, value=best_value, refined=False)

    try:
        result = optimize.minimize_scalar(
            in_logit,
            bracket=(us[best - 1], us[best], us[best + 1]),
            method='golden',
            options={'xtol': xtol, 'maxiter': GOLDEN_MAXITER},
        )
    except ValueError as e:
        # Ties on the grid make the triple an invalid bracket
        logger.debug(f'Golden-section bracket rejected, using bounded search: {str(e)} [SEARCH-GOLDEN02]')
        result = optimize.minimize_scalar(
            in_logit,
            bounds=(us[best - 1], us[best + 1]),
            method='bounded',
            options={'xatol': xtol, 'maxiter': GOLDEN_MAXITER},
        )

    if np.isfinite(result.fun) and result.fun < best_value:
        return SearchResult(t=float(special.expit(result.x)), value=float(result.fun), refined=True)
    return SearchResult(t=best_t, value=best_value, refined=False)
