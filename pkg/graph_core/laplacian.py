"""
Graph Laplacian construction and spectral data.

The bundle carries everything the recovery code needs from L = D - W:
its dense eigendecomposition, its square root, the component structure
and the degrees.

AIDEV-NOTE: kernel-from-components; the K smallest eigenvalues are zeroed, K from connected_components
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from django.conf import settings
from scipy import linalg

from .graph import Graph, GraphError, connected_components

logger = logging.getLogger(__name__)


class GraphTooLargeError(GraphError):
    """Graph exceeds the dense-mode vertex limit."""
    pass


class UnobservedComponentError(GraphError):
    """Some connected component has no labeled vertex."""

    def __init__(self, components):
        self.components = list(components)
        super().__init__(f'unobserved component(s): {self.components}')


@dataclass(frozen=True, eq=False)
class LaplacianBundle:
    """
    Laplacian L = D - W with its full eigendecomposition.

    Immutable once built; safe to share read-only.
    """
    laplacian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt_laplacian: np.ndarray
    num_components: int
    component_of: np.ndarray
    degree: np.ndarray
    zero_threshold: float

    @property
    def num_vertices(self) -> int:
        return self.laplacian.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def positive_mask(self) -> np.ndarray:
        """Eigenpairs outside ker(L): every index from num_components on."""
        return np.arange(self.num_vertices) >= self.num_components

    @property
    def kernel_basis(self) -> np.ndarray:
        """Orthonormal basis of ker(L) as columns (N x K)."""
        return self.eigenvectors[:, ~self.positive_mask]

    def whitening(self) -> np.ndarray:
        """
        chi_+ diag(lambda^-1/2), an N x r matrix W with W W^T = L^+.

        Maps the unit ball of ||L^{1/2} f|| (modulo ker L) onto the unit ball.
        """
        positive = self.positive_mask
        return self.eigenvectors[:, positive] / np.sqrt(self.eigenvalues[positive])

    def energy_norm(self, f: np.ndarray) -> float:
        """||L^{1/2} f||_2."""
        return float(np.linalg.norm(self.sqrt_laplacian @ f))


def build_laplacian(graph: Graph, dense_limit: Optional[int] = None) -> LaplacianBundle:
    """
    Build the Laplacian bundle of a graph.

    Args:
        graph: Valid graph
        dense_limit: Maximum N (defaults to settings.GRAPH_DENSE_VERTEX_LIMIT)

    Returns:
        LaplacianBundle with eigenvalues in nondecreasing order

    Raises:
        GraphTooLargeError: If N exceeds the dense limit

    Examples:
        >>> bundle = build_laplacian(Graph.from_edges(3, [(0, 1, 1), (0, 2, 1), (1, 2, 1)]))
        >>> bundle.eigenvalues.round(12)
        array([0., 3., 3.])
    """
    limit = dense_limit if dense_limit is not None else settings.GRAPH_DENSE_VERTEX_LIMIT
    if graph.num_vertices > limit:
        logger.error(f'Refusing N={graph.num_vertices} above dense limit {limit} [LAPLACIAN-BUILD01]')
        raise GraphTooLargeError(
            f'graph too large for dense mode: N={graph.num_vertices} exceeds limit {limit}'
        )

    weights = graph.adjacency()
    degree = weights.sum(axis=1)
    laplacian = np.diag(degree) - weights

    eigenvalues, eigenvectors = linalg.eigh(laplacian)
    lambda_max = max(float(eigenvalues[-1]), 0.0)
    zero_threshold = graph.num_vertices * np.finfo(float).eps * lambda_max

    if eigenvalues[0] < -1e-10 * max(lambda_max, 1.0):
        logger.warning(f'Laplacian has eigenvalue {eigenvalues[0]:.3e} below zero [LAPLACIAN-BUILD02]')

    # The multiplicity of 0 is exactly the component count
    num_components, component_of = connected_components(graph)
    zero_count = int(np.sum(eigenvalues <= zero_threshold))
    if zero_count != num_components:
        logger.warning(
            f'Threshold sees {zero_count} zero eigenvalue(s) but the graph has {num_components} '
            f'component(s); eigenvalues[{num_components - 1}:{num_components + 1}]='
            f'{eigenvalues[max(num_components - 1, 0):num_components + 1]} [LAPLACIAN-BUILD03]'
        )
    eigenvalues = eigenvalues.copy()
    eigenvalues[:num_components] = 0.0
    eigenvalues[num_components:] = np.maximum(eigenvalues[num_components:], 0.0)
    sqrt_laplacian = (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T
    sqrt_laplacian = (sqrt_laplacian + sqrt_laplacian.T) / 2

    logger.debug(
        f'Built Laplacian N={graph.num_vertices}, K={num_components}, '
        f'lambda_max={lambda_max:.6g} [LAPLACIAN-BUILD04]'
    )

    return LaplacianBundle(
        laplacian=laplacian,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        sqrt_laplacian=sqrt_laplacian,
        num_components=num_components,
        component_of=component_of,
        degree=degree,
        zero_threshold=zero_threshold,
    )


def validate_observability(bundle: LaplacianBundle, labeled: Iterable[int]) -> None:
    """
    Check that every connected component contains a labeled vertex.

    This is exactly ker(L) and ker(Lambda) intersecting only at 0, which
    makes (1-tau) L + tau Lambda^* Lambda positive definite for tau in (0,1).

    Args:
        bundle: Laplacian bundle
        labeled: Labeled vertex indices (nonempty, within range)

    Raises:
        GraphError: If `labeled` is empty or out of range
        UnobservedComponentError: Listing the components without labels
    """
    labeled = np.asarray(list(labeled), dtype=int)
    if labeled.size == 0:
        raise GraphError('labeled vertex set must be nonempty')
    if labeled.min() < 0 or labeled.max() >= bundle.num_vertices:
        raise GraphError(f'labeled vertices must lie in [0, {bundle.num_vertices})')

    observed = np.zeros(bundle.num_components, dtype=bool)
    observed[bundle.component_of[labeled]] = True
    missing = np.flatnonzero(~observed).tolist()
    if missing:
        logger.warning(f'Unobserved components {missing} [LAPLACIAN-OBS01]')
        raise UnobservedComponentError(missing)
