"""
The regularization map and the observation machinery around it.

Delta_tau(y) minimizes (1 - tau) ||L^{1/2} f||^2 + tau ||Lambda f - y||^2.
Its normal equation ((1 - tau) L + tau Lambda^* Lambda) f = tau Lambda^* y
is solved by dense Cholesky; Lambda is never materialized, Lambda^* y is
y scattered onto the labeled coordinates.

AIDEV-NOTE: tau-limits; tau=0 is the componentwise label mean, tau=1 the harmonic interpolant
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from graph_core import LaplacianBundle, UnobservedComponentError, validate_observability

logger = logging.getLogger(__name__)


class RecoveryError(Exception):
    """Invalid observation, quantity of interest, parameter or solve failure."""
    pass


@dataclass(frozen=True, eq=False)
class Observation:
    """
    Labeled vertices V_l (in stored order) and their observed values y.

    Lambda f = f[labeled]; Lambda^* a scatters a onto the labeled
    coordinates, so Lambda Lambda^* is the identity.
    """
    labeled: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        labeled = np.asarray(self.labeled, dtype=int).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if labeled.size == 0:
            raise RecoveryError('observation needs at least one labeled vertex')
        if labeled.size != values.size:
            raise RecoveryError(
                f'{labeled.size} labeled vertices but {values.size} observed values'
            )
        if labeled.min() < 0:
            raise RecoveryError('labeled vertex indices must be nonnegative')
        if np.unique(labeled).size != labeled.size:
            raise RecoveryError('labeled vertex indices must be distinct')
        if not np.all(np.isfinite(values)):
            raise RecoveryError('observed values must be finite')
        object.__setattr__(self, 'labeled', labeled)
        object.__setattr__(self, 'values', values)

    @property
    def num_labeled(self) -> int:
        return int(self.labeled.size)

    def check_vertices(self, num_vertices: int) -> None:
        if self.labeled.max() >= num_vertices:
            raise RecoveryError(
                f'labeled vertex {int(self.labeled.max())} out of range for N={num_vertices}'
            )

    def restrict(self, f: np.ndarray) -> np.ndarray:
        """Lambda f."""
        return np.asarray(f)[self.labeled]

    def lift(self, a: np.ndarray, num_vertices: int) -> np.ndarray:
        """Lambda^* a."""
        lifted = np.zeros(num_vertices)
        lifted[self.labeled] = a
        return lifted

    def mask(self, num_vertices: int) -> np.ndarray:
        """Diagonal of Lambda^* Lambda as a boolean vector."""
        selected = np.zeros(num_vertices, dtype=bool)
        selected[self.labeled] = True
        return selected

    def unlabeled(self, num_vertices: int) -> np.ndarray:
        """V_u in increasing order."""
        return np.flatnonzero(~self.mask(num_vertices))

    def with_values(self, values: np.ndarray) -> 'Observation':
        return Observation(self.labeled, values)


QOI_VARIANTS = ('unlabeled', 'full', 'average', 'vertex', 'matrix')


@dataclass(frozen=True, eq=False)
class QuantityOfInterest:
    """
    A linear map Q from signals to R^n.

    Build through the class constructors (`unlabeled()`, `vertex(3)`, ...)
    or `parse('vertex:3')`.
    """
    variant: str
    index: Optional[int] = None
    matrix_value: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant not in QOI_VARIANTS:
            raise RecoveryError(f'Unknown quantity of interest: {self.variant}')
        if self.variant == 'vertex' and (self.index is None or self.index < 0):
            raise RecoveryError('vertex quantity of interest needs a nonnegative index')
        if self.variant == 'matrix':
            matrix = np.atleast_2d(np.asarray(self.matrix_value, dtype=float))
            if matrix.ndim != 2:
                raise RecoveryError('matrix quantity of interest must be two-dimensional')
            object.__setattr__(self, 'matrix_value', matrix)

    @classmethod
    def unlabeled(cls) -> 'QuantityOfInterest':
        return cls('unlabeled')

    @classmethod
    def full(cls) -> 'QuantityOfInterest':
        return cls('full')

    @classmethod
    def average(cls) -> 'QuantityOfInterest':
        return cls('average')

    @classmethod
    def vertex(cls, index: int) -> 'QuantityOfInterest':
        return cls('vertex', index=int(index))

    @classmethod
    def matrix(cls, matrix: np.ndarray) -> 'QuantityOfInterest':
        return cls('matrix', matrix_value=matrix)

    @classmethod
    def parse(cls, text: str) -> 'QuantityOfInterest':
        """
        Parse a command-line spelling: unlabeled, full, average or vertex:i.

        Examples:
            >>> QuantityOfInterest.parse('vertex:2').index
            2
        """
        token = text.strip().lower()
        if token in ('unlabeled', 'full', 'average'):
            return cls(token)
        if token.startswith('vertex:'):
            try:
                return cls.vertex(int(token.split(':', 1)[1]))
            except ValueError:
                pass
        raise RecoveryError(
            f'Invalid quantity of interest {text!r}; expected unlabeled, full, average or vertex:i'
        )

    def __str__(self) -> str:
        if self.variant == 'vertex':
            return f'vertex:{self.index}'
        return self.variant

    def materialize(self, num_vertices: int, labeled: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        The n x N matrix of Q.

        Args:
            num_vertices: N
            labeled: Labeled vertices (required for the unlabeled variant)

        Raises:
            RecoveryError: On a missing labeled set or a dimension mismatch
        """
        if self.variant == 'full':
            return np.eye(num_vertices)
        if self.variant == 'average':
            return np.full((1, num_vertices), 1.0 / num_vertices)
        if self.variant == 'vertex':
            if self.index >= num_vertices:
                raise RecoveryError(f'vertex {self.index} out of range for N={num_vertices}')
            row = np.zeros((1, num_vertices))
            row[0, self.index] = 1.0
            return row
        if self.variant == 'unlabeled':
            if labeled is None:
                raise RecoveryError('unlabeled quantity of interest needs the labeled set')
            selected = np.zeros(num_vertices, dtype=bool)
            selected[np.asarray(labeled, dtype=int)] = True
            return np.eye(num_vertices)[~selected]
        if self.matrix_value.shape[1] != num_vertices:
            raise RecoveryError(
                f'dimension mismatch: Q has {self.matrix_value.shape[1]} columns, N={num_vertices}'
            )
        return self.matrix_value


@dataclass(frozen=True)
class ModelParams:
    """Smoothness budget epsilon and label-error budget eta."""
    epsilon: float
    eta: float

    def __post_init__(self):
        for name in ('epsilon', 'eta'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise RecoveryError(f'{name} must be positive and finite, got {value}')

    def scaled(self, epsilon_factor: float = 1.0, eta_factor: float = 1.0) -> 'ModelParams':
        """Overestimated budgets (epsilon_factor * epsilon, eta_factor * eta)."""
        return ModelParams(self.epsilon * epsilon_factor, self.eta * eta_factor)


EPS_RULE_KINDS = ('literal_squared', 'linear_2x', 'explicit')


@dataclass(frozen=True)
class EpsRule:
    """
    How epsilon is derived from a ground-truth signal in experiments.

    literal_squared: epsilon = 2 ||L^{1/2} f||^2
    linear_2x:       epsilon = 2 ||L^{1/2} f||
    explicit:        epsilon = value
    """
    kind: str = 'literal_squared'
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in EPS_RULE_KINDS:
            raise RecoveryError(f'Unknown eps rule: {self.kind}')
        if self.kind == 'explicit' and (self.value is None or not self.value > 0):
            raise RecoveryError('explicit eps rule needs a positive value')

    def to_json(self) -> Union[str, dict]:
        if self.kind == 'explicit':
            return {'explicit': self.value}
        return self.kind


def smoothness_budget(bundle: LaplacianBundle, f: np.ndarray, rule: EpsRule) -> float:
    """Epsilon for a ground-truth signal under an eps rule."""
    if rule.kind == 'explicit':
        return float(rule.value)
    energy = bundle.energy_norm(f)
    if rule.kind == 'linear_2x':
        return 2.0 * energy
    return 2.0 * energy ** 2


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise RecoveryError(f'tau must lie in the open interval (0, 1), got {tau}')
    return tau


def _prepare(bundle: LaplacianBundle, obs: Observation) -> None:
    obs.check_vertices(bundle.num_vertices)
    validate_observability(bundle, obs.labeled)


def regularization_system(bundle: LaplacianBundle, labeled: np.ndarray, tau: float) -> np.ndarray:
    """(1 - tau) L + tau Lambda^* Lambda as a dense matrix."""
    system = (1.0 - tau) * bundle.laplacian
    system[labeled, labeled] += tau
    return system


def _factor(system: np.ndarray):
    try:
        return linalg.cho_factor(system, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        logger.warning(f'Cholesky failed, falling back to symmetric solve: {str(e)} [RECOVERY-SOLVE01]')
        return None


def _solve(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    factor = _factor(system)
    if factor is not None:
        return linalg.cho_solve(factor, rhs, check_finite=False)
    try:
        return linalg.solve(system, rhs, assume_a='sym', check_finite=False)
    except linalg.LinAlgError as e:
        logger.error(f'Regularization system is singular: {str(e)} [RECOVERY-SOLVE02]')
        raise RecoveryError(f'regularization system is singular: {str(e)}')


def regularize(bundle: LaplacianBundle, obs: Observation, tau: float) -> np.ndarray:
    """
    Delta_tau(y) for tau in (0, 1).

    Args:
        bundle: Laplacian bundle
        obs: Observation (must touch every component)
        tau: Regularization parameter in the open interval

    Returns:
        The recovered N-vector f_tau

    Raises:
        RecoveryError: If tau is outside (0, 1)
        UnobservedComponentError: If some component has no label

    Examples:
        >>> regularize(build_laplacian(path_graph(3)), Observation([0, 2], [0.0, 1.0]), 0.5)
        array([0.25, 0.5 , 0.75])
    """
    tau = _check_tau(tau)
    _prepare(bundle, obs)
    system = regularization_system(bundle, obs.labeled, tau)
    rhs = tau * obs.lift(obs.values, bundle.num_vertices)
    return _solve(system, rhs)


def regularizer_matrix(bundle: LaplacianBundle, obs: Observation, tau: float) -> np.ndarray:
    """
    The N x n_l matrix of the linear map y -> Delta_tau(y).

    Column j is Delta_tau applied to the j-th standard basis vector.
    """
    tau = _check_tau(tau)
    _prepare(bundle, obs)
    system = regularization_system(bundle, obs.labeled, tau)
    rhs = np.zeros((bundle.num_vertices, obs.num_labeled))
    rhs[obs.labeled, np.arange(obs.num_labeled)] = tau
    return _solve(system, rhs)


def limit_tau_zero(obs: Observation, component_of: np.ndarray) -> np.ndarray:
    """
    The tau -> 0 limit: on each component, the mean of its observed values.

    Args:
        obs: Observation
        component_of: Component index of every vertex

    Raises:
        UnobservedComponentError: If some component has no label
    """
    component_of = np.asarray(component_of, dtype=int)
    obs.check_vertices(component_of.size)
    num_components = int(component_of.max()) + 1
    labeled_components = component_of[obs.labeled]
    totals = np.bincount(labeled_components, weights=obs.values, minlength=num_components)
    counts = np.bincount(labeled_components, minlength=num_components)
    missing = np.flatnonzero(counts == 0).tolist()
    if missing:
        raise UnobservedComponentError(missing)
    return (totals / counts)[component_of]


def _limit_tau_zero_matrix(obs: Observation, component_of: np.ndarray) -> np.ndarray:
    component_of = np.asarray(component_of, dtype=int)
    labeled_components = component_of[obs.labeled]
    counts = np.bincount(labeled_components, minlength=int(component_of.max()) + 1)
    same = component_of[:, None] == labeled_components[None, :]
    return same / counts[labeled_components][None, :]


def harmonic_interpolate(bundle: LaplacianBundle, obs: Observation) -> np.ndarray:
    """
    The tau -> 1 limit: interpolate y exactly with minimal Dirichlet energy.

    Solves L_uu f_u = -L_ul y on the unlabeled block.
    """
    return harmonic_matrix(bundle, obs) @ obs.values


def harmonic_matrix(bundle: LaplacianBundle, obs: Observation) -> np.ndarray:
    """N x n_l matrix of the harmonic interpolation map."""
    _prepare(bundle, obs)
    unlabeled = obs.unlabeled(bundle.num_vertices)
    matrix = np.zeros((bundle.num_vertices, obs.num_labeled))
    matrix[obs.labeled, np.arange(obs.num_labeled)] = 1.0
    if unlabeled.size == 0:
        return matrix

    block = bundle.laplacian[np.ix_(unlabeled, unlabeled)]
    coupling = bundle.laplacian[np.ix_(unlabeled, obs.labeled)]
    try:
        factor = linalg.cho_factor(block, lower=True)
    except linalg.LinAlgError as e:
        logger.error(f'Unlabeled Laplacian block is singular: {str(e)} [RECOVERY-HARMONIC01]')
        raise RecoveryError('unlabeled Laplacian block is singular despite observability')
    matrix[unlabeled] = -linalg.cho_solve(factor, coupling)
    return matrix


def regularize_with_limits(bundle: LaplacianBundle, obs: Observation, tau: float) -> np.ndarray:
    """Delta_tau(y) on the closed interval, tau=0 and tau=1 taken as limits."""
    tau = float(tau)
    if tau == 0.0:
        _prepare(bundle, obs)
        return limit_tau_zero(obs, bundle.component_of)
    if tau == 1.0:
        return harmonic_interpolate(bundle, obs)
    return regularize(bundle, obs, tau)


def regularizer_matrix_with_limits(bundle: LaplacianBundle, obs: Observation, tau: float) -> np.ndarray:
    """Matrix of Delta_tau on the closed interval."""
    tau = float(tau)
    if tau == 0.0:
        _prepare(bundle, obs)
        return _limit_tau_zero_matrix(obs, bundle.component_of)
    if tau == 1.0:
        return harmonic_matrix(bundle, obs)
    return regularizer_matrix(bundle, obs, tau)


def apply_qoi(
    q: QuantityOfInterest,
    f: np.ndarray,
    labeled: Optional[Iterable[int]] = None,
) -> np.ndarray:
    """
    Q f.

    Examples:
        >>> apply_qoi(QuantityOfInterest.average(), np.array([1.0, 2.0, 3.0]))
        array([2.])
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise RecoveryError(f'dimension mismatch: expected a vector, got shape {f.shape}')
    labeled = None if labeled is None else np.asarray(list(labeled), dtype=int)
    return q.materialize(f.size, labeled) @ f
