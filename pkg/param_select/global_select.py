"""
Globally optimal regularization parameter.

The two-multiplier program

    minimize c eps^2 + d eta^2  subject to  c L + d Lambda^* Lambda >= Q^* Q,  c, d >= 0

is solved by a spectral reduction. Along the ray c = (1-t)s, d = ts the
smallest feasible s is the largest generalized eigenvalue of
(Q^* Q, (1-t)L + t Lambda^* Lambda), so the program becomes the 1-D problem
min_t s(t)((1-t) eps^2 + t eta^2). The optimal multipliers give
tau = d / (c + d), and Q Delta_tau is a globally optimal recovery map.

AIDEV-NOTE: global-verify; every interior solution is cross-checked against a log-spaced (c, d) grid
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from scipy import linalg

from graph_core import LaplacianBundle, validate_observability
from recovery import ModelParams, Observation, QuantityOfInterest, regularizer_matrix_with_limits
from spectral import (
    FeasibilityContext,
    SpectralError,
    constrained_opnorm,
    is_feasible,
    max_generalized_eig,
    min_eig_constraint,
)

from .search import minimize_on_unit_interval

logger = logging.getLogger(__name__)

ZERO_QOI_TOLERANCE = 1e-14


class InfeasibleProgramError(Exception):
    """No multipliers below the feasibility cap satisfy the constraint."""
    pass


@dataclass(frozen=True, eq=False)
class GlobalSolution:
    """
    Optimal multipliers, the parameter they define and the optimal map.

    regime is one of:
        interior    - reduction optimum with 0 < tau < 1
        tau_zero    - d = 0, Q vanishes on ker(L); tau = 0 (componentwise mean map)
        tau_one     - c = 0, Q reads labeled vertices only; tau = 1 (harmonic map)
        grid        - the verification grid beat the reduction
        degenerate  - Q = 0; c = d = 0 and tau = 0.5 by convention
    """
    c_flat: float
    d_flat: float
    tau_flat: float
    gwce_sq_bound: float
    recovery_matrix: np.ndarray
    regime: str = 'interior'
    verified: bool = False
    grid_value: Optional[float] = None

    @property
    def gwce_bound(self) -> float:
        return float(np.sqrt(self.gwce_sq_bound))

    @property
    def degenerate(self) -> bool:
        return self.regime == 'degenerate'


def as_observation(obs: Union[Observation, Sequence[int]]) -> Observation:
    """Accept an Observation or a bare labeled set (values are then zero)."""
    if isinstance(obs, Observation):
        return obs
    labeled = np.asarray(list(obs), dtype=int)
    return Observation(labeled, np.zeros(labeled.size))


def minimal_scale(ctx: FeasibilityContext, t: float) -> float:
    """Smallest s making ((1-t)s, ts) feasible; inf when the pencil is singular."""
    try:
        return max(max_generalized_eig(ctx.gram, ctx.pencil(t)), 0.0)
    except SpectralError:
        return float('inf')


def _boundary_candidates(ctx: FeasibilityContext, params: ModelParams) -> List[Tuple[float, float, float, str]]:
    candidates = []
    q = ctx.qoi_matrix
    scale = max(1.0, float(np.linalg.norm(q)))

    opnorm = constrained_opnorm(q, ctx.bundle)
    if np.isfinite(opnorm):
        c = opnorm ** 2
        candidates.append((c * params.epsilon ** 2, c, 0.0, 'tau_zero'))

    unlabeled = ~ctx.mask
    if not unlabeled.any() or np.max(np.abs(q[:, unlabeled])) <= ZERO_QOI_TOLERANCE * scale:
        labeled_block = q[:, ctx.labeled]
        d = float(linalg.norm(labeled_block, 2)) ** 2 if labeled_block.size else 0.0
        candidates.append((d * params.eta ** 2, 0.0, d, 'tau_one'))
    return candidates


def verify_on_grid(
    ctx: FeasibilityContext,
    params: ModelParams,
    c_center: float,
    d_center: float,
    size: int,
) -> Optional[Tuple[float, float, float]]:
    """
    Brute-force the program on a size x size log grid, one decade around a center.

    Feasibility is monotone in d for fixed c, so the smallest feasible grid d
    of every grid c is found by bisection over the d grid.

    Returns:
        (value, c, d) of the best feasible grid point, or None
    """
    cs = np.logspace(np.log10(c_center) - 1, np.log10(c_center) + 1, size)
    ds = np.logspace(np.log10(d_center) - 1, np.log10(d_center) + 1, size)
    return _grid_optimum(ctx, params, cs, ds)


def wide_grid_optimum(
    ctx: FeasibilityContext,
    params: ModelParams,
    size: int,
    decades: float,
) -> Optional[Tuple[float, float, float]]:
    """
    Brute-force the program on a grid that ignores the reduction's answer.

    Both multipliers range over lambda_max(Q^* Q) * 10^[-decades, decades],
    the natural scale of the constraint.

    Returns:
        (value, c, d) of the best feasible grid point, or None
    """
    scale = float(linalg.eigvalsh(ctx.gram, subset_by_index=[ctx.num_vertices - 1] * 2)[0])
    if scale <= 0:
        return None
    axis = scale * np.logspace(-decades, decades, size)
    return _grid_optimum(ctx, params, axis, axis)


def _grid_optimum(
    ctx: FeasibilityContext,
    params: ModelParams,
    cs: np.ndarray,
    ds: np.ndarray,
) -> Optional[Tuple[float, float, float]]:
    size = len(ds)
    eps_sq, eta_sq = params.epsilon ** 2, params.eta ** 2

    best = None
    for c in cs:
        if not is_feasible(ctx, c, ds[-1]):
            continue
        if is_feasible(ctx, c, ds[0]):
            index = 0
        else:
            low, high = 0, size - 1
            while high - low > 1:
                middle = (low + high) // 2
                if is_feasible(ctx, c, ds[middle]):
                    high = middle
                else:
                    low = middle
            index = high
        value = c * eps_sq + ds[index] * eta_sq
        if best is None or value < best[0]:
            best = (float(value), float(c), float(ds[index]))
    return best


def solve_global(
    bundle: LaplacianBundle,
    obs: Union[Observation, Sequence[int]],
    q: Union[QuantityOfInterest, np.ndarray],
    params: ModelParams,
    seed_grid_size: Optional[int] = None,
    verify_grid_size: Optional[int] = None,
    verify: bool = True,
    feasibility_cap: Optional[float] = None,
) -> GlobalSolution:
    """
    Solve the two-multiplier program and build the optimal recovery map.

    Args:
        bundle: Laplacian bundle
        obs: Observation, or just the labeled vertices
        q: Quantity of interest or its n x N matrix
        params: Budgets epsilon and eta
        seed_grid_size: Logit seed grid (default settings.GLOBAL_SEED_GRID_SIZE)
        verify_grid_size: Side of the verification grid (default settings.GLOBAL_VERIFY_GRID_SIZE)
        verify: Run the grid cross-check for interior solutions
        feasibility_cap: Largest admissible s (default settings.GLOBAL_FEASIBILITY_CAP)

    Returns:
        GlobalSolution

    Raises:
        UnobservedComponentError: If some component has no label
        InfeasibleProgramError: If no feasible multipliers exist below the cap

    Examples:
        >>> bundle = build_laplacian(Graph.from_edges(2, [(0, 1, 1.0)]))
        >>> solution = solve_global(bundle, [0], QuantityOfInterest.unlabeled(), ModelParams(1, 1))
        >>> round(solution.tau_flat, 6), round(solution.gwce_sq_bound, 6)
        (0.5, 4.0)
    """
    obs = as_observation(obs)
    obs.check_vertices(bundle.num_vertices)
    validate_observability(bundle, obs.labeled)
    ctx = FeasibilityContext.build(bundle, obs.labeled, q)
    seed_grid_size = seed_grid_size or settings.GLOBAL_SEED_GRID_SIZE
    verify_grid_size = verify_grid_size or settings.GLOBAL_VERIFY_GRID_SIZE
    cap = feasibility_cap or settings.GLOBAL_FEASIBILITY_CAP
    eps_sq, eta_sq = params.epsilon ** 2, params.eta ** 2

    if np.max(np.abs(ctx.gram), initial=0.0) <= ZERO_QOI_TOLERANCE:
        logger.info('Quantity of interest is zero, returning the degenerate solution [PARAMSEL-GLOBAL01]')
        return GlobalSolution(
            c_flat=0.0, d_flat=0.0, tau_flat=0.5, gwce_sq_bound=0.0,
            recovery_matrix=np.zeros((ctx.qoi_matrix.shape[0], obs.num_labeled)),
            regime='degenerate', verified=True,
        )

    def reduced(t: float) -> float:
        return minimal_scale(ctx, t) * ((1.0 - t) * eps_sq + t * eta_sq)

    candidates = _boundary_candidates(ctx, params)
    search = minimize_on_unit_interval(reduced, seed_grid_size)
    scale = minimal_scale(ctx, search.t)
    if np.isfinite(scale) and scale <= cap:
        c, d = (1.0 - search.t) * scale, search.t * scale
        candidates.append((c * eps_sq + d * eta_sq, c, d, 'interior'))

    if not candidates:
        logger.error(f'No feasible multipliers below cap {cap:.3g} [PARAMSEL-GLOBAL02]')
        raise InfeasibleProgramError(f'program infeasible: no feasible (c, d) with s <= {cap:.3g}')

    # Boundary candidates are exact, so they win ties
    value, c, d, regime = min(candidates, key=lambda item: (item[0], item[3] == 'interior'))

    verified = regime != 'interior'
    grid_value = None
    if regime == 'interior' and verify:
        grids = [
            verify_on_grid(ctx, params, c, d, verify_grid_size),
            wide_grid_optimum(ctx, params, settings.GLOBAL_WIDE_GRID_SIZE, settings.GLOBAL_WIDE_GRID_DECADES),
        ]
        grid = min((g for g in grids if g is not None), default=None)
        if grid is not None and grid[0] < value * (1.0 - settings.GLOBAL_VERIFY_TOLERANCE):
            logger.warning(
                f'Grid point (c={grid[1]:.6g}, d={grid[2]:.6g}) beats the reduction, '
                f'refining around it [PARAMSEL-GLOBAL06]'
            )
            refined = verify_on_grid(ctx, params, grid[1], grid[2], verify_grid_size)
            if refined is not None:
                grid = min(grid, refined)
        if grid is not None:
            grid_value = grid[0]
            verified = value <= grid_value * (1.0 + settings.GLOBAL_VERIFY_TOLERANCE)
            if not verified:
                logger.warning(
                    f'Reduction value {value:.12g} exceeds grid optimum {grid_value:.12g} '
                    f'beyond tolerance [PARAMSEL-GLOBAL03]'
                )
            if grid_value < value:
                value, c, d = grid
                regime = 'grid'

    tau = d / (c + d)
    if regime == 'interior' and min_eig_constraint(ctx, c, d) < -1e-9 * (1 + c * bundle.lambda_max + d):
        logger.warning(f'Returned multipliers slightly infeasible at tau={tau:.6g} [PARAMSEL-GLOBAL04]')

    recovery_matrix = ctx.qoi_matrix @ regularizer_matrix_with_limits(bundle, obs, tau)
    logger.debug(
        f'Global selection tau={tau:.8g} c={c:.8g} d={d:.8g} value={value:.8g} '
        f'regime={regime} [PARAMSEL-GLOBAL05]'
    )
    return GlobalSolution(
        c_flat=float(c), d_flat=float(d), tau_flat=float(tau), gwce_sq_bound=float(value),
        recovery_matrix=recovery_matrix, regime=regime, verified=verified, grid_value=grid_value,
    )
