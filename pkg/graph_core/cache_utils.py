"""
Cache helpers for Laplacian bundles.

Experiments rebuild the same dataset graph for every trial; the dense
eigendecomposition is the expensive part, so bundles are cached in
Django's cache keyed by the graph digest.

AIDEV-NOTE: laplacian-cache; Cache failures fall back to building, never raise
"""

import logging

from django.conf import settings
from django.core.cache import cache

from .graph import Graph
from .laplacian import LaplacianBundle, build_laplacian

logger = logging.getLogger(__name__)


def laplacian_cache_key(graph: Graph) -> str:
    return f'laplacian:{graph.digest()}'


def cached_laplacian(graph: Graph) -> LaplacianBundle:
    """
    Return the Laplacian bundle of `graph`, building it on a cache miss.

    Args:
        graph: Input graph

    Returns:
        LaplacianBundle (shared instance when served from a local cache)
    """
    key = laplacian_cache_key(graph)
    try:
        bundle = cache.get(key)
        if bundle is not None:
            logger.debug(f'Laplacian cache hit for {key} [CACHE-LAPLACIAN01]')
            return bundle
    except Exception as e:
        logger.warning(f'Laplacian cache read failed: {str(e)} [CACHE-LAPLACIAN02]')

    bundle = build_laplacian(graph)

    try:
        cache.set(key, bundle, settings.LAPLACIAN_CACHE_TIMEOUT)
        logger.debug(f'Laplacian cached under {key} [CACHE-LAPLACIAN03]')
    except Exception as e:
        logger.warning(f'Laplacian cache write failed: {str(e)} [CACHE-LAPLACIAN04]')

    return bundle


def invalidate_laplacian(graph: Graph) -> None:
    """Drop a cached bundle (used by tests and after graph edits)."""
    try:
        cache.delete(laplacian_cache_key(graph))
        logger.info(f'Laplacian cache invalidated for {graph.num_vertices}-vertex graph [CACHE-LAPLACIAN05]')
    except Exception as e:
        logger.warning(f'Failed to invalidate Laplacian cache: {str(e)} [CACHE-LAPLACIAN06]')
