"""
Global worst-case error of a linear recovery map.

For an estimate M y of Q f with y = Lambda f + e, the error is B f - M e with
B = Q - M Lambda. Its supremum over ||L^{1/2} f|| <= eps and ||e|| <= eta is
the largest value of eps ||(B W)^T u|| + eta ||M^T u|| over unit vectors u,
W being the whitening of L. Squaring and splitting the sum,

    gwce^2 = min_t lambda_max(eps^2 B W W^T B^T / (1 - t) + eta^2 M M^T / t),

a convex problem in t that is solved on the n x n output space.
"""

import logging
from typing import Sequence, Union

import numpy as np
from django.conf import settings
from scipy import linalg

from graph_core import LaplacianBundle
from recovery import ModelParams, Observation, QuantityOfInterest, RecoveryError
from spectral import KERNEL_TOLERANCE, FeasibilityContext, constrained_opnorm

from .search import minimize_on_unit_interval

logger = logging.getLogger(__name__)


def error_operators(
    map_matrix: np.ndarray,
    bundle: LaplacianBundle,
    obs: Union[Observation, Sequence[int]],
    q: Union[QuantityOfInterest, np.ndarray],
):
    """
    (B, M) for a recovery map given as its n x n_l matrix.

    Raises:
        RecoveryError: On a dimension mismatch
    """
    labeled = obs.labeled if isinstance(obs, Observation) else np.asarray(list(obs), dtype=int)
    qoi = FeasibilityContext.build(bundle, labeled, q).qoi_matrix
    map_matrix = np.atleast_2d(np.asarray(map_matrix, dtype=float))
    if map_matrix.shape != (qoi.shape[0], labeled.size):
        raise RecoveryError(
            f'dimension mismatch: map is {map_matrix.shape}, expected {(qoi.shape[0], labeled.size)}'
        )
    b = qoi.copy()
    b[:, labeled] -= map_matrix
    return b, map_matrix


def evaluate_gwce_linear(
    map_matrix: np.ndarray,
    bundle: LaplacianBundle,
    obs: Union[Observation, Sequence[int]],
    q: Union[QuantityOfInterest, np.ndarray],
    params: ModelParams,
) -> float:
    """
    Worst-case error of the linear map y -> map_matrix @ y.

    Args:
        map_matrix: n x n_l matrix M
        bundle: Laplacian bundle
        obs: Observation or labeled vertices
        q: Quantity of interest or its n x N matrix
        params: Budgets epsilon and eta

    Returns:
        The supremum, or inf when B = Q - M Lambda does not vanish on ker(L)
    """
    b, m = error_operators(map_matrix, bundle, obs, q)
    scale = max(1.0, float(np.linalg.norm(b)))
    kernel_part = b @ bundle.kernel_basis
    if kernel_part.size and np.max(np.abs(kernel_part)) > KERNEL_TOLERANCE * scale:
        logger.debug('Map error does not vanish on ker(L), gwce is infinite [PARAMSEL-GWCE01]')
        return float('inf')

    whitened = b @ bundle.whitening()
    smooth_part = params.epsilon ** 2 * (whitened @ whitened.T)
    noise_part = params.eta ** 2 * (m @ m.T)

    smooth_zero = not np.any(smooth_part)
    noise_zero = not np.any(noise_part)
    if smooth_zero and noise_zero:
        return 0.0
    if smooth_zero:
        return params.eta * float(linalg.norm(m, 2))
    if noise_zero:
        return params.epsilon * float(linalg.norm(whitened, 2))

    def combined(t: float) -> float:
        matrix = smooth_part / (1.0 - t) + noise_part / t
        size = matrix.shape[0]
        return float(linalg.eigvalsh(matrix, subset_by_index=[size - 1, size - 1])[0])

    search = minimize_on_unit_interval(combined, settings.GLOBAL_SEED_GRID_SIZE)
    return float(np.sqrt(search.value))


def gwce_split_bound(
    map_matrix: np.ndarray,
    bundle: LaplacianBundle,
    obs: Union[Observation, Sequence[int]],
    q: Union[QuantityOfInterest, np.ndarray],
    params: ModelParams,
) -> float:
    """
    eps * constrained_opnorm(B) + eta * ||M||_op.

    An upper bound on evaluate_gwce_linear, equal to it for one-row Q.
    """
    b, m = error_operators(map_matrix, bundle, obs, q)
    smooth = constrained_opnorm(b, bundle)
    if not np.isfinite(smooth):
        return float('inf')
    noise = float(linalg.norm(m, 2)) if m.size else 0.0
    return params.epsilon * smooth + params.eta * noise
