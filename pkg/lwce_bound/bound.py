"""
Semidefinite upper bound on the local worst-case error.

For an estimate z of Q f given the observed y, the squared local worst-case
error is at most every gamma for which some c, d >= 0 make

    [[ S,   w ],
     [ w^T, gamma - ||z||^2 - c eps^2 + d (||y||^2 - eta^2) ]]  >= 0,

with S = c L + d Lambda^* Lambda - Q^* Q and w = Q^* z - d Lambda^* y. By the
Schur complement the smallest such gamma is

    gamma(c, d) = ||z||^2 + c eps^2 - d (||y||^2 - eta^2) + w^T S^+ w,

finite only when S >= 0 and w lies in the range of S. gamma is convex in
(c, d) and is minimized along rays c = (1-t)s, d = ts: one generalized
eigendecomposition of (Q^* Q, (1-t)L + t Lambda^* Lambda) per ray turns
gamma into a cheap function of s.

AIDEV-NOTE: ray-cache; decompositions depend on t only and are shared by every z of a curve
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from scipy import linalg, optimize, special

from graph_core import LaplacianBundle, validate_observability
from param_select.search import LOGIT_BOUND, logit_grid
from recovery import ModelParams, Observation, QuantityOfInterest, regularize_with_limits
from spectral import FeasibilityContext, SpectralError

logger = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-10
NULLSPACE_TOLERANCE = 1e-8
REFINE_XTOL = 1e-7
REFINE_MAXITER = 100


@dataclass(frozen=True)
class LwceBoundResult:
    """Bound gamma on lwce^2 with its certifying multipliers."""
    gamma: float
    c_star: float
    d_star: float
    feasible: bool

    @property
    def bound(self) -> float:
        """Bound on lwce itself."""
        return float(np.sqrt(self.gamma)) if self.feasible else float('inf')


@dataclass(frozen=True)
class CurvePoint:
    tau: float
    gamma: float
    c: float
    d: float


@dataclass(frozen=True, eq=False)
class _Ray:
    t: float
    mu: np.ndarray
    mu_max: float
    qoi_coordinates: np.ndarray
    label_coordinates: np.ndarray


class LwceProblem:
    """
    Data of the bound for a fixed graph, observation, quantity and budgets.

    Ray decompositions are cached per t, so evaluating many estimates z
    (a curve over tau) reuses the coarse-grid decompositions.
    """

    def __init__(
        self,
        bundle: LaplacianBundle,
        obs: Observation,
        q: Union[QuantityOfInterest, np.ndarray],
        params: ModelParams,
    ):
        obs.check_vertices(bundle.num_vertices)
        validate_observability(bundle, obs.labeled)
        self.bundle = bundle
        self.obs = obs
        self.params = params
        self.ctx = FeasibilityContext.build(bundle, obs.labeled, q)
        self.lifted_y = obs.lift(obs.values, bundle.num_vertices)
        self.y_sq = float(obs.values @ obs.values)
        self.multiplier_min = settings.LWCE_MULTIPLIER_MIN
        self.multiplier_max = settings.LWCE_MULTIPLIER_MAX
        self._rays: Dict[float, Optional[_Ray]] = {}

    @property
    def qoi_matrix(self) -> np.ndarray:
        return self.ctx.qoi_matrix

    def _decompose(self, t: float) -> Optional[_Ray]:
        try:
            mu, vectors = linalg.eigh(self.ctx.gram, self.ctx.pencil(t), check_finite=False)
        except linalg.LinAlgError as e:
            logger.debug(f'Ray t={t:.6g} has a singular pencil: {str(e)} [LWCE-RAY01]')
            return None
        return _Ray(
            t=t,
            mu=mu,
            mu_max=max(float(mu[-1]), 0.0),
            qoi_coordinates=vectors.T @ self.qoi_matrix.T,
            label_coordinates=vectors.T @ self.lifted_y,
        )

    def _ray(self, t: float, cache: bool = False) -> Optional[_Ray]:
        """Decomposition along the ray t; only coarse-grid rays are kept."""
        if t in self._rays:
            return self._rays[t]
        ray = self._decompose(t)
        if cache:
            self._rays[t] = ray
        return ray

    def _scale_bounds(self, ray: _Ray) -> Tuple[float, float]:
        t = ray.t
        lower = max(self.multiplier_min / (1.0 - t), self.multiplier_min / t)
        upper = min(self.multiplier_max / (1.0 - t), self.multiplier_max / t)
        lower = max(lower, ray.mu_max + max(ray.mu_max, 1.0) * 1e-12)
        return lower, upper

    def _ray_gamma(self, ray: _Ray, z: np.ndarray, s: np.ndarray) -> np.ndarray:
        """gamma along a ray for an array of scales s > mu_max."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t = ray.t
        eps_sq, eta_sq = self.params.epsilon ** 2, self.params.eta ** 2
        coordinates = ray.qoi_coordinates @ z
        numerators = (coordinates[None, :] - t * s[:, None] * ray.label_coordinates[None, :]) ** 2
        schur = np.sum(numerators / (s[:, None] - ray.mu[None, :]), axis=1)
        return float(z @ z) + (1.0 - t) * s * eps_sq - t * s * (self.y_sq - eta_sq) + schur

    def _best_scale(self, ray: Optional[_Ray], z: np.ndarray, start: Optional[float] = None) -> Tuple[float, float]:
        """Minimize gamma over the scale on one ray: (gamma, s)."""
        if ray is None:
            return float('inf'), float('nan')
        lower, upper = self._scale_bounds(ray)
        if lower > upper:
            return float('inf'), float('nan')

        offset = ray.mu_max
        x_low, x_high = np.log(lower - offset), np.log(upper - offset)

        def in_log(x: float) -> float:
            return float(self._ray_gamma(ray, z, offset + np.exp(x))[0])

        result = optimize.minimize_scalar(
            in_log, bounds=(x_low, x_high), method='bounded',
            options={'xatol': REFINE_XTOL, 'maxiter': REFINE_MAXITER},
        )
        candidates = [(float(result.fun), offset + float(np.exp(result.x)))]
        if start is not None and lower <= start <= upper:
            candidates.append((float(self._ray_gamma(ray, z, start)[0]), start))
        return min(candidates)

    def coarse_grid(self, z: np.ndarray) -> Tuple[float, float, float]:
        """Best (gamma, t, s) over the coarse ray x scale grid."""
        size = settings.LWCE_GRID_SIZE
        exponents = np.linspace(-6.0, 6.0, size)
        best = (float('inf'), float('nan'), float('nan'))
        for t in logit_grid(size):
            t = float(t)
            ray = self._ray(t, cache=True)
            if ray is None:
                continue
            lower, upper = self._scale_bounds(ray)
            if lower > upper:
                continue
            scales = ray.mu_max + max(ray.mu_max, 1.0) * 10.0 ** exponents
            scales = np.unique(np.clip(scales, lower, upper))
            values = self._ray_gamma(ray, z, scales)
            index = int(np.argmin(values))
            if values[index] < best[0]:
                best = (float(values[index]), t, float(scales[index]))
        return best

    def upper_bound(self, z: np.ndarray) -> LwceBoundResult:
        """
        Minimize gamma(c, d) for one estimate z.

        Coarse grid first, then at most LWCE_REFINE_SWEEPS sweeps that
        re-optimize the scale on the current ray and the ray itself (with
        the scale optimized inside), stopping once a sweep stops improving.
        """
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size != self.qoi_matrix.shape[0]:
            raise SpectralError(f'dimension mismatch: z has {z.size} entries, Q has {self.qoi_matrix.shape[0]} rows')

        gamma, t, s = self.coarse_grid(z)
        if not np.isfinite(gamma):
            logger.warning('No feasible multipliers on the coarse grid [LWCE-BOUND01]')
            return LwceBoundResult(gamma=float('inf'), c_star=float('nan'), d_star=float('nan'), feasible=False)

        step = 2.0 * LOGIT_BOUND / (settings.LWCE_GRID_SIZE - 1)
        for sweep in range(settings.LWCE_REFINE_SWEEPS):
            previous = gamma
            gamma, s = self._best_scale(self._ray(t), z, start=s)

            u = float(special.logit(t))

            def over_rays(v: float) -> float:
                return self._best_scale(self._ray(float(special.expit(v))), z)[0]

            result = optimize.minimize_scalar(
                over_rays, bounds=(u - step, u + step), method='bounded',
                options={'xatol': REFINE_XTOL, 'maxiter': REFINE_MAXITER},
            )
            if result.fun < gamma:
                t = float(special.expit(result.x))
                gamma, s = self._best_scale(self._ray(t), z)

            if previous - gamma <= 1e-9 * (1.0 + abs(gamma)):
                logger.debug(f'Refinement converged after {sweep + 1} sweep(s) [LWCE-BOUND02]')
                break

        c, d = (1.0 - t) * s, t * s
        return LwceBoundResult(gamma=max(float(gamma), 0.0), c_star=float(c), d_star=float(d), feasible=True)

    def gamma_at(self, z: np.ndarray, c: float, d: float) -> float:
        """gamma(c, d) through an eigendecomposition of S with range check."""
        z = np.asarray(z, dtype=float).reshape(-1)
        eps_sq, eta_sq = self.params.epsilon ** 2, self.params.eta ** 2
        s_matrix = self.ctx.constraint_matrix(c, d)
        w = self.qoi_matrix.T @ z - d * self.lifted_y
        values, vectors = linalg.eigh(s_matrix)
        tolerance = RANGE_TOLERANCE * max(1.0, float(np.max(np.abs(values))))
        if values[0] < -tolerance:
            return float('inf')
        coordinates = vectors.T @ w
        positive = values > tolerance
        if np.any(np.abs(coordinates[~positive]) > NULLSPACE_TOLERANCE * max(1.0, float(np.linalg.norm(w)))):
            return float('inf')
        schur = float(np.sum(coordinates[positive] ** 2 / values[positive]))
        return float(z @ z) + c * eps_sq - d * (self.y_sq - eta_sq) + schur

    def certificate_matrix(self, z: np.ndarray, c: float, d: float, gamma: float) -> np.ndarray:
        """The block matrix whose positive semidefiniteness certifies gamma."""
        z = np.asarray(z, dtype=float).reshape(-1)
        eps_sq, eta_sq = self.params.epsilon ** 2, self.params.eta ** 2
        w = self.qoi_matrix.T @ z - d * self.lifted_y
        corner = gamma - float(z @ z) - c * eps_sq + d * (self.y_sq - eta_sq)
        top = np.hstack([self.ctx.constraint_matrix(c, d), w[:, None]])
        bottom = np.hstack([w[None, :], [[corner]]])
        return np.vstack([top, bottom])


def lwce_gamma(
    bundle: LaplacianBundle,
    obs: Observation,
    q: Union[QuantityOfInterest, np.ndarray],
    z: np.ndarray,
    params: ModelParams,
    c: float,
    d: float,
) -> float:
    """gamma(c, d), or inf when S is not PSD or w leaves the range of S."""
    return LwceProblem(bundle, obs, q, params).gamma_at(z, c, d)


def lwce_upper_bound(
    bundle: LaplacianBundle,
    obs: Observation,
    q: Union[QuantityOfInterest, np.ndarray],
    z: np.ndarray,
    params: ModelParams,
) -> LwceBoundResult:
    """
    Upper bound on lwce^2 for the estimate z of Q f.

    Args:
        bundle: Laplacian bundle
        obs: Observation with the observed values y
        q: Quantity of interest or its n x N matrix
        z: Estimate of Q f (n-vector)
        params: Budgets epsilon and eta

    Returns:
        LwceBoundResult; feasible=False when no multipliers in
        [LWCE_MULTIPLIER_MIN, LWCE_MULTIPLIER_MAX] give a finite gamma
    """
    return LwceProblem(bundle, obs, q, params).upper_bound(z)


def lwce_curve(
    bundle: LaplacianBundle,
    obs: Observation,
    q: Union[QuantityOfInterest, np.ndarray],
    params: ModelParams,
    tau_grid: Sequence[float],
) -> List[CurvePoint]:
    """
    The bound along the regularization path, z = Q Delta_tau(y), ordered by tau.

    Examples:
        >>> [point.tau for point in lwce_curve(bundle, obs, q, params, [0.7, 0.2])]
        [0.2, 0.7]
    """
    problem = LwceProblem(bundle, obs, q, params)
    points = []
    for tau in sorted(float(tau) for tau in tau_grid):
        z = problem.qoi_matrix @ regularize_with_limits(bundle, obs, tau)
        result = problem.upper_bound(z)
        points.append(CurvePoint(tau=tau, gamma=result.gamma, c=result.c_star, d=result.d_star))
    logger.info(f'Computed lwce curve with {len(points)} point(s) [LWCE-CURVE01]')
    return points
