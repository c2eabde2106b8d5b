"""
Monte-Carlo lower bounds on the local worst-case error.

The data-consistent set F = {f : ||L^{1/2} f|| <= eps, ||Lambda f - y|| <= eta}
is convex and bounded once every component carries a label. Points of F are
drawn along random rays from a feasible center: along f = center + alpha * d
both constraints are quadratics in alpha, so the exit step is a closed-form
root. Part of the draws sit on the boundary, where the worst errors live.

The largest ||Q f - z|| over the draws is a lower bound on lwce(z), which
sandwiches the semidefinite upper bound from below.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from graph_core import LaplacianBundle, validate_observability
from param_select import solve_local
from recovery import ModelParams, Observation

logger = logging.getLogger(__name__)

CENTER_TOLERANCE = 1e-9
BOUNDARY_SHRINK = 1.0 - 1e-12


def _max_step(a: np.ndarray, b: np.ndarray, c0: float) -> np.ndarray:
    """
    Largest alpha >= 0 with a alpha^2 + 2 b alpha + c0 <= 0, given c0 <= 0.

    Uses the cancellation-free form of the positive root; a = 0 with b <= 0
    never leaves the constraint.
    """
    disc = np.sqrt(np.maximum(b * b - a * c0, 0.0))
    with np.errstate(divide='ignore', invalid='ignore'):
        rising = -c0 / (b + disc)
        falling = (disc - b) / a
    step = np.where(b > 0.0, rising, falling)
    return np.where((b <= 0.0) & (a <= 0.0), np.inf, step)


def sample_feasible_signals(
    bundle: LaplacianBundle,
    obs: Observation,
    params: ModelParams,
    num_samples: int,
    rng: np.random.Generator,
    center: Optional[np.ndarray] = None,
    boundary_fraction: float = 0.5,
) -> np.ndarray:
    """
    Draw signals from the data-consistent set.

    Args:
        bundle: Laplacian bundle
        obs: Observation with the observed values y
        params: Budgets epsilon and eta
        num_samples: Number of draws
        rng: numpy Generator supplying the directions and radii
        center: Feasible starting point; defaults to the locally selected
            estimate, which is feasible whenever y is model-consistent
        boundary_fraction: Share of draws placed on the boundary of F

    Returns:
        (num_samples, N) array of feasible signals, or an empty (0, N) array
        when the center is infeasible (no consistent signal exists)
    """
    num_vertices = bundle.num_vertices
    obs.check_vertices(num_vertices)
    validate_observability(bundle, obs.labeled)
    if center is None:
        center = solve_local(bundle, obs, params).f_hat
    center = np.asarray(center, dtype=float).reshape(-1)

    eps_sq, eta_sq = params.epsilon ** 2, params.eta ** 2
    laplacian = bundle.laplacian
    labeled = obs.labeled
    residual = center[labeled] - obs.values

    smooth_slack = float(center @ laplacian @ center) - eps_sq
    noise_slack = float(residual @ residual) - eta_sq
    if smooth_slack > CENTER_TOLERANCE * eps_sq or noise_slack > CENTER_TOLERANCE * eta_sq:
        logger.warning(
            f'Sampling center violates the budgets by ({smooth_slack:.3g}, {noise_slack:.3g}), '
            f'no consistent signal to sample [LWCE-SAMPLE01]'
        )
        return np.empty((0, num_vertices))

    directions = rng.standard_normal((num_samples, num_vertices))
    on_labels = directions[:, labeled]
    smooth_step = _max_step(
        np.einsum('ij,jk,ik->i', directions, laplacian, directions),
        directions @ (laplacian @ center),
        min(smooth_slack, 0.0),
    )
    noise_step = _max_step(
        np.einsum('ij,ij->i', on_labels, on_labels),
        on_labels @ residual,
        min(noise_slack, 0.0),
    )
    steps = np.minimum(smooth_step, noise_step) * BOUNDARY_SHRINK
    steps = np.where(np.isfinite(steps), steps, 0.0)

    # interior radii follow u^(1/N), uniform over the star-shaped body
    radii = rng.random(num_samples) ** (1.0 / num_vertices)
    radii[: int(round(boundary_fraction * num_samples))] = 1.0
    samples = center[None, :] + (radii * steps)[:, None] * directions
    logger.debug(f'Drew {num_samples} feasible signal(s) [LWCE-SAMPLE02]')
    return samples


def sampled_lwce(samples: np.ndarray, qoi_matrix: np.ndarray, z: np.ndarray) -> float:
    """max ||Q f - z|| over the sampled signals, 0 for an empty sample."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        return 0.0
    errors = samples @ np.asarray(qoi_matrix, dtype=float).T - np.asarray(z, dtype=float)[None, :]
    return float(np.max(np.linalg.norm(errors, axis=1)))


def enclosing_ball_center(points: np.ndarray, iterations: int = 1000) -> Tuple[np.ndarray, float]:
    """
    Approximate minimum enclosing ball of a point cloud.

    Repeatedly steps toward the farthest point with step 1/(k+1). The
    returned radius is the exact farthest distance from the returned
    center, so it never underestimates the optimal radius.

    Returns:
        (center, radius)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    center = points[0].copy()
    for k in range(1, iterations + 1):
        farthest = points[int(np.argmax(np.sum((points - center) ** 2, axis=1)))]
        center += (farthest - center) / (k + 1)
    radius = float(np.sqrt(np.max(np.sum((points - center) ** 2, axis=1))))
    return center, radius
