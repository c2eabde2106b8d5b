"""
Eigenvalue oracles behind the two-multiplier programs.

Feasibility of multipliers (c, d) means c L + d Lambda^* Lambda - Q^* Q is
positive semidefinite, which is a single smallest-eigenvalue computation.

AIDEV-NOTE: feasibility-tolerance; (c, d) is feasible when lambda_min >= -1e-9 (1 + c lambda_max(L) + d)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from graph_core import LaplacianBundle
from recovery import Observation, QuantityOfInterest

logger = logging.getLogger(__name__)

FEASIBILITY_RELATIVE_TOLERANCE = 1e-9
KERNEL_TOLERANCE = 1e-8


class SpectralError(Exception):
    """An eigenvalue oracle was called outside its domain."""
    pass


@dataclass(frozen=True, eq=False)
class FeasibilityContext:
    """
    Data of the constraint c L + d Lambda^* Lambda >= Q^* Q.

    `qoi_matrix` is the n x N matrix of Q and `gram` is Q^* Q.
    """
    bundle: LaplacianBundle
    labeled: np.ndarray
    qoi_matrix: np.ndarray
    gram: np.ndarray

    @classmethod
    def build(
        cls,
        bundle: LaplacianBundle,
        labeled: Union[Observation, Sequence[int]],
        q: Union[QuantityOfInterest, np.ndarray],
    ) -> 'FeasibilityContext':
        """
        Materialize Q and Q^* Q for a labeled set.

        Args:
            bundle: Laplacian bundle
            labeled: Observation or labeled vertex indices
            q: Quantity of interest or its n x N matrix
        """
        if isinstance(labeled, Observation):
            labeled = labeled.labeled
        labeled = np.asarray(labeled, dtype=int)
        if isinstance(q, QuantityOfInterest):
            matrix = q.materialize(bundle.num_vertices, labeled)
        else:
            matrix = np.atleast_2d(np.asarray(q, dtype=float))
        if matrix.shape[1] != bundle.num_vertices:
            raise SpectralError(
                f'dimension mismatch: Q has {matrix.shape[1]} columns, N={bundle.num_vertices}'
            )
        gram = matrix.T @ matrix
        gram = (gram + gram.T) / 2
        return cls(bundle=bundle, labeled=labeled, qoi_matrix=matrix, gram=gram)

    @property
    def num_vertices(self) -> int:
        return self.bundle.num_vertices

    @property
    def mask(self) -> np.ndarray:
        selected = np.zeros(self.num_vertices, dtype=bool)
        selected[self.labeled] = True
        return selected

    def observation_gram(self) -> np.ndarray:
        """Lambda^* Lambda."""
        return np.diag(self.mask.astype(float))

    def pencil(self, t: float) -> np.ndarray:
        """(1 - t) L + t Lambda^* Lambda."""
        system = (1.0 - t) * self.bundle.laplacian
        system[self.labeled, self.labeled] += t
        return system

    def constraint_matrix(self, c: float, d: float) -> np.ndarray:
        """c L + d Lambda^* Lambda - Q^* Q."""
        matrix = c * self.bundle.laplacian - self.gram
        matrix[self.labeled, self.labeled] += d
        return matrix


def feasibility_tolerance(ctx: FeasibilityContext, c: float, d: float) -> float:
    return FEASIBILITY_RELATIVE_TOLERANCE * (1.0 + c * ctx.bundle.lambda_max + d)


def min_eig_constraint(ctx: FeasibilityContext, c: float, d: float) -> float:
    """
    lambda_min(c L + d Lambda^* Lambda - Q^* Q).

    Args:
        ctx: Feasibility context
        c: Smoothness multiplier, finite and nonnegative
        d: Data multiplier, finite and nonnegative

    Returns:
        The smallest eigenvalue; -lambda_max(Q^* Q) at c = d = 0
    """
    if not (np.isfinite(c) and np.isfinite(d)) or c < 0 or d < 0:
        raise SpectralError(f'multipliers must be finite and nonnegative, got c={c}, d={d}')
    values = linalg.eigvalsh(
        ctx.constraint_matrix(c, d), subset_by_index=[0, 0], check_finite=False
    )
    return float(values[0])


def is_feasible(ctx: FeasibilityContext, c: float, d: float) -> bool:
    return min_eig_constraint(ctx, c, d) >= -feasibility_tolerance(ctx, c, d)


def max_generalized_eig(a: np.ndarray, m: np.ndarray) -> float:
    """
    Largest lambda with A v = lambda M v, for A symmetric PSD and M symmetric PD.

    Raises:
        SpectralError: If M is not positive definite
    """
    a = np.asarray(a, dtype=float)
    m = np.asarray(m, dtype=float)
    if a.shape != m.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpectralError(f'shape mismatch: A {a.shape}, M {m.shape}')
    size = a.shape[0]
    try:
        values = linalg.eigh(
            (a + a.T) / 2, (m + m.T) / 2,
            eigvals_only=True, subset_by_index=[size - 1, size - 1], check_finite=False,
        )
    except linalg.LinAlgError as e:
        logger.debug(f'Generalized eigensolve failed: {str(e)} [SPECTRAL-GEIG01]')
        raise SpectralError('M is not positive definite')
    return float(values[0])


def constrained_opnorm(
    b: np.ndarray,
    bundle: LaplacianBundle,
    kernel_tolerance: Optional[float] = None,
) -> float:
    """
    sup ||B f|| over ||L^{1/2} f|| <= 1.

    Finite only when B vanishes on ker(L); otherwise +inf is returned.

    Args:
        b: n x N matrix (a 1-D array is treated as one row)
        bundle: Laplacian bundle
        kernel_tolerance: Vanishing tolerance on ker(L), relative to max(1, ||B||)

    Returns:
        Largest singular value of B chi_+ diag(lambda_+^{-1/2}), or inf
    """
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[1] != bundle.num_vertices:
        raise SpectralError(f'dimension mismatch: B has {b.shape[1]} columns, N={bundle.num_vertices}')
    tolerance = KERNEL_TOLERANCE if kernel_tolerance is None else kernel_tolerance
    scale = max(1.0, float(np.linalg.norm(b)))
    kernel_part = b @ bundle.kernel_basis
    if kernel_part.size and np.max(np.abs(kernel_part)) > tolerance * scale:
        return float('inf')

    whitened = b @ bundle.whitening()
    if whitened.size == 0:
        return 0.0
    return float(linalg.norm(whitened, 2))
