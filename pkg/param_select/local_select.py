"""
Locally near-optimal regularization parameter.

tau is chosen where the regularized solution balances its two terms,
||L^{1/2} f_tau|| = (eps / eta) ||Lambda f_tau - y||. The balance function
increases from a negative value at tau = 0 (componentwise mean) to a
positive one at tau = 1 (harmonic interpolant), so bisection finds the root.
The resulting estimate is within a factor 2 of the best local worst-case
error.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from graph_core import LaplacianBundle, validate_observability
from recovery import ModelParams, Observation, limit_tau_zero, regularize_with_limits

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-12
BISECTION_MAXITER = 200
INTERPOLATION_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LocalSolution:
    tau_natural: float
    f_hat: np.ndarray
    balance_residual: float
    minimax_value: float
    degenerate: bool = False


def balance_terms(bundle: LaplacianBundle, obs: Observation, f: np.ndarray):
    """(||L^{1/2} f||, ||Lambda f - y||)."""
    return bundle.energy_norm(f), float(np.linalg.norm(obs.restrict(f) - obs.values))


def balance_function(bundle: LaplacianBundle, obs: Observation, params: ModelParams, tau: float) -> float:
    """||L^{1/2} f_tau|| - (eps / eta) ||Lambda f_tau - y|| on the closed interval."""
    energy, misfit = balance_terms(bundle, obs, regularize_with_limits(bundle, obs, tau))
    return energy - params.epsilon / params.eta * misfit


def minimax_objective(bundle: LaplacianBundle, obs: Observation, params: ModelParams, f: np.ndarray) -> float:
    """max{||L^{1/2} f||^2, (eps^2 / eta^2) ||Lambda f - y||^2}."""
    energy, misfit = balance_terms(bundle, obs, f)
    return max(energy ** 2, (params.epsilon / params.eta * misfit) ** 2)


def solve_local(bundle: LaplacianBundle, obs: Observation, params: ModelParams) -> LocalSolution:
    """
    Find the balancing parameter and its estimate.

    Degenerate inputs: y = 0 gives f_hat = 0; labels that a componentwise
    constant signal interpolates exactly give that signal. Both report
    tau_natural = 0.5 and degenerate=True.

    Args:
        bundle: Laplacian bundle
        obs: Observation
        params: Budgets epsilon and eta

    Returns:
        LocalSolution

    Raises:
        UnobservedComponentError: If some component has no label
    """
    obs.check_vertices(bundle.num_vertices)
    validate_observability(bundle, obs.labeled)

    if not np.any(obs.values):
        logger.info('All observed values are zero, returning the zero estimate [PARAMSEL-LOCAL01]')
        return LocalSolution(
            tau_natural=0.5, f_hat=np.zeros(bundle.num_vertices),
            balance_residual=0.0, minimax_value=0.0, degenerate=True,
        )

    f_zero = limit_tau_zero(obs, bundle.component_of)
    energy_zero, misfit_zero = balance_terms(bundle, obs, f_zero)
    if misfit_zero <= INTERPOLATION_TOLERANCE * (1.0 + np.linalg.norm(obs.values)):
        logger.info('Labels are componentwise constant, balance function vanishes [PARAMSEL-LOCAL02]')
        return LocalSolution(
            tau_natural=0.5, f_hat=f_zero,
            balance_residual=abs(energy_zero - params.epsilon / params.eta * misfit_zero),
            minimax_value=minimax_objective(bundle, obs, params, f_zero),
            degenerate=True,
        )

    tau = optimize.bisect(
        lambda t: balance_function(bundle, obs, params, t),
        0.0, 1.0, xtol=BISECTION_XTOL, maxiter=BISECTION_MAXITER,
    )
    f_hat = regularize_with_limits(bundle, obs, tau)
    residual = abs(balance_function(bundle, obs, params, tau))
    if residual > 1e-8 * (params.epsilon + params.eta):
        logger.warning(f'Balance residual {residual:.3e} at tau={tau:.12g} [PARAMSEL-LOCAL03]')

    logger.debug(f'Local selection tau={tau:.12g} residual={residual:.3e} [PARAMSEL-LOCAL04]')
    return LocalSolution(
        tau_natural=float(tau),
        f_hat=f_hat,
        balance_residual=residual,
        minimax_value=minimax_objective(bundle, obs, params, f_hat),
    )
