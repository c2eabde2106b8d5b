"""
Weighted undirected graphs for GraphRecover.

A Graph stores each undirected edge once in canonical (i < j) order and
expands it symmetrically when the adjacency matrix is requested.

AIDEV-NOTE: canonical-edges; Edges are (i, j, w) with i < j, no duplicates, w >= 0
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


class GraphError(Exception):
    """Invalid graph input or a graph operation that cannot proceed."""
    pass


@dataclass(frozen=True)
class Graph:
    """
    Weighted undirected graph on vertices 0..num_vertices-1.

    Build instances through `Graph.from_edges`, which canonicalizes the
    edge list; the constructor trusts its input.
    """
    num_vertices: int
    edges: Tuple[Edge, ...]
    vertex_names: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_edges(
        cls,
        num_vertices: int,
        edges: Iterable[Tuple[int, int, float]],
        vertex_names: Optional[Iterable[str]] = None
    ) -> 'Graph':
        """
        Validate and canonicalize an edge list.

        Self-loops are dropped and duplicate pairs have their weights
        summed; both cases are logged as warnings.

        Args:
            num_vertices: Number of vertices N (positive)
            edges: Iterable of (i, j, w) with 0 <= i, j < N and w >= 0
            vertex_names: Optional list of N names

        Returns:
            Graph with edges sorted by (i, j)

        Raises:
            GraphError: On a bad vertex count, index or weight
        """
        if int(num_vertices) != num_vertices or num_vertices < 1:
            raise GraphError(f'num_vertices must be a positive integer, got {num_vertices}')
        num_vertices = int(num_vertices)

        merged: Dict[Tuple[int, int], float] = {}
        self_loops = 0
        duplicates = 0
        for position, (i, j, w) in enumerate(edges):
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < num_vertices and 0 <= j < num_vertices):
                raise GraphError(f'Edge {position} ({i}, {j}) is out of range for N={num_vertices}')
            if not np.isfinite(w) or w < 0:
                raise GraphError(f'Edge {position} ({i}, {j}) has invalid weight {w}')
            if i == j:
                self_loops += 1
                continue
            key = (i, j) if i < j else (j, i)
            if key in merged:
                duplicates += 1
                merged[key] += w
            else:
                merged[key] = w

        if self_loops:
            logger.warning(f'Dropped {self_loops} self-loop(s) [GRAPH-BUILD01]')
        if duplicates:
            logger.warning(f'Summed weights of {duplicates} duplicate edge(s) [GRAPH-BUILD02]')

        names = None
        if vertex_names is not None:
            names = tuple(str(name) for name in vertex_names)
            if len(names) != num_vertices:
                raise GraphError(f'Expected {num_vertices} vertex names, got {len(names)}')

        canonical = tuple((i, j, w) for (i, j), w in sorted(merged.items()))
        return cls(num_vertices=num_vertices, edges=canonical, vertex_names=names)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix W."""
        weights = np.zeros((self.num_vertices, self.num_vertices))
        for i, j, w in self.edges:
            weights[i, j] = w
            weights[j, i] = w
        return weights

    def sparse_adjacency(self, positive_only: bool = True) -> sparse.csr_matrix:
        """Symmetric sparse adjacency, optionally keeping only w > 0."""
        kept = [(i, j, w) for i, j, w in self.edges if w > 0 or not positive_only]
        rows = [i for i, _, _ in kept] + [j for _, j, _ in kept]
        cols = [j for _, j, _ in kept] + [i for i, _, _ in kept]
        data = [w for _, _, w in kept] * 2
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.num_vertices, self.num_vertices))

    def degrees(self) -> np.ndarray:
        """Weighted degree D_ii = sum_j W_ij."""
        degree = np.zeros(self.num_vertices)
        for i, j, w in self.edges:
            degree[i] += w
            degree[j] += w
        return degree

    def digest(self) -> str:
        """Stable content hash, used as a cache key."""
        hasher = hashlib.sha256()
        hasher.update(str(self.num_vertices).encode())
        for i, j, w in self.edges:
            hasher.update(f'{i},{j},{w!r};'.encode())
        return hasher.hexdigest()

    def to_dict(self) -> Dict:
        """JSON-serializable form (used for Celery task arguments)."""
        return {
            'num_vertices': self.num_vertices,
            'edges': [[i, j, w] for i, j, w in self.edges],
            'vertex_names': list(self.vertex_names) if self.vertex_names else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Graph':
        return cls.from_edges(data['num_vertices'], data['edges'], data.get('vertex_names'))


def connected_components(graph: Graph) -> Tuple[int, np.ndarray]:
    """
    Connected components over edges with positive weight.

    Components are numbered 0..K-1 in order of their smallest vertex.

    Args:
        graph: Input graph

    Returns:
        (K, component_of) where component_of[v] is the component of vertex v

    Examples:
        >>> connected_components(Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))
        (2, array([0, 0, 1, 1]))
    """
    count, labels = csgraph.connected_components(
        graph.sparse_adjacency(positive_only=True), directed=False
    )
    # Renumber by first occurrence so numbering does not depend on the traversal
    _, first_seen = np.unique(labels, return_index=True)
    order = np.argsort(first_seen)
    renumber = np.empty(count, dtype=int)
    renumber[order] = np.arange(count)
    return int(count), renumber[labels]


def largest_component(graph: Graph) -> Graph:
    """
    Induced subgraph on the largest connected component.

    Vertices keep their relative order; ties go to the lower-numbered
    component.
    """
    count, component_of = connected_components(graph)
    if count == 1:
        return graph

    sizes = np.bincount(component_of, minlength=count)
    keep = int(np.argmax(sizes))
    kept_vertices = np.flatnonzero(component_of == keep)
    new_index = {int(v): position for position, v in enumerate(kept_vertices)}

    edges: List[Edge] = [
        (new_index[i], new_index[j], w)
        for i, j, w in graph.edges
        if i in new_index and j in new_index
    ]
    names = None
    if graph.vertex_names is not None:
        names = [graph.vertex_names[v] for v in kept_vertices]

    logger.info(
        f'Restricted graph to largest component: {len(kept_vertices)} of '
        f'{graph.num_vertices} vertices [GRAPH-LCC01]'
    )
    return Graph.from_edges(len(kept_vertices), edges, names)


def build_clique_union(num_cliques: int, clique_size: int) -> Graph:
    """
    Unweighted graph made of `num_cliques` disjoint complete graphs.

    Its Laplacian divided by `clique_size` is an orthogonal projector.

    Args:
        num_cliques: K >= 1
        clique_size: n >= 2

    Returns:
        Graph on K*n vertices, clique k occupying vertices k*n..(k+1)*n-1
    """
    if num_cliques < 1 or clique_size < 2:
        raise GraphError(f'Need num_cliques >= 1 and clique_size >= 2, got ({num_cliques}, {clique_size})')

    edges = []
    for k in range(num_cliques):
        offset = k * clique_size
        for a in range(clique_size):
            for b in range(a + 1, clique_size):
                edges.append((offset + a, offset + b, 1.0))
    return Graph.from_edges(num_cliques * clique_size, edges)
