"""
Fast path for a single linear functional Q f = <q, f>.

The optimal estimate is <a, y> where a minimizes

    eps * ||W^T (q - Lambda^* a)|| + eta * ||a||

subject to q - Lambda^* a being orthogonal to ker(L). Writing the squared
sum of norms as min_t [eps^2 ||.||^2 / (1 - t) + eta^2 ||a||^2 / t] turns the
problem into a convex 1-D search over t with a constrained least-squares
problem inside; the kernel constraints are eliminated through a null-space
basis.
"""

import logging
from typing import NamedTuple, Sequence, Union

import numpy as np
from django.conf import settings
from scipy import linalg

from graph_core import LaplacianBundle, validate_observability
from recovery import ModelParams, Observation, RecoveryError

from .search import minimize_on_unit_interval

logger = logging.getLogger(__name__)


class FunctionalEstimate(NamedTuple):
    weights: np.ndarray
    gwce_value: float


def estimate_functional(
    q: np.ndarray,
    bundle: LaplacianBundle,
    obs: Union[Observation, Sequence[int]],
    params: ModelParams,
) -> FunctionalEstimate:
    """
    Optimal weights a for estimating <q, f> by <a, y>.

    Args:
        q: N-vector defining the functional
        bundle: Laplacian bundle
        obs: Observation or labeled vertices
        params: Budgets epsilon and eta

    Returns:
        FunctionalEstimate(weights, gwce_value); gwce_value is the worst-case
        error of the returned weights

    Raises:
        UnobservedComponentError: If some component has no label
    """
    labeled = obs.labeled if isinstance(obs, Observation) else np.asarray(list(obs), dtype=int)
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != bundle.num_vertices:
        raise RecoveryError(f'dimension mismatch: q has {q.size} entries, N={bundle.num_vertices}')
    validate_observability(bundle, labeled)

    kernel = bundle.kernel_basis
    constraint = kernel[labeled].T
    particular, *_ = linalg.lstsq(constraint, kernel.T @ q)
    null = linalg.null_space(constraint)

    white = bundle.whitening()
    white_q = white.T @ q
    white_labeled = white[labeled].T
    eps, eta = params.epsilon, params.eta

    def weights_for(t: float) -> np.ndarray:
        if null.shape[1] == 0:
            return particular
        smooth_scale = eps / np.sqrt(1.0 - t)
        noise_scale = eta / np.sqrt(t)
        design = np.vstack([smooth_scale * (white_labeled @ null), noise_scale * null])
        rhs = np.concatenate([
            smooth_scale * (white_q - white_labeled @ particular),
            -noise_scale * particular,
        ])
        coefficients, *_ = linalg.lstsq(design, rhs)
        return particular + null @ coefficients

    def split_objective(t: float) -> float:
        a = weights_for(t)
        smooth = np.sum((white_q - white_labeled @ a) ** 2)
        return eps ** 2 * smooth / (1.0 - t) + eta ** 2 * float(a @ a) / t

    search = minimize_on_unit_interval(split_objective, settings.GLOBAL_SEED_GRID_SIZE)
    weights = weights_for(search.t)
    value = eps * float(np.linalg.norm(white_q - white_labeled @ weights)) + eta * float(np.linalg.norm(weights))
    logger.debug(f'Functional estimate trade-off t={search.t:.8g} value={value:.8g} [PARAMSEL-FUNC01]')
    return FunctionalEstimate(weights=weights, gwce_value=value)
