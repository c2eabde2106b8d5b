"""Graph representation, Laplacian construction and connectivity."""

from .graph import (
    Graph,
    GraphError,
    build_clique_union,
    connected_components,
    largest_component,
)
from .laplacian import (
    GraphTooLargeError,
    LaplacianBundle,
    UnobservedComponentError,
    build_laplacian,
    validate_observability,
)
from .cache_utils import cached_laplacian, invalidate_laplacian, laplacian_cache_key

__all__ = [
    'Graph',
    'GraphError',
    'GraphTooLargeError',
    'LaplacianBundle',
    'UnobservedComponentError',
    'build_clique_union',
    'build_laplacian',
    'cached_laplacian',
    'connected_components',
    'invalidate_laplacian',
    'laplacian_cache_key',
    'largest_component',
    'validate_observability',
]
