"""
Small graph generators used by the CLI demos and the test suites.
"""

from typing import Optional

import numpy as np

from .graph import Graph, GraphError


def path_graph(num_vertices: int, weight: float = 1.0) -> Graph:
    """Path 0 - 1 - ... - (N-1)."""
    return Graph.from_edges(num_vertices, [(i, i + 1, weight) for i in range(num_vertices - 1)])


def complete_graph(num_vertices: int) -> Graph:
    return Graph.from_edges(
        num_vertices,
        [(i, j, 1.0) for i in range(num_vertices) for j in range(i + 1, num_vertices)],
    )


def star_graph(num_leaves: int) -> Graph:
    """Hub 0 joined to leaves 1..num_leaves."""
    return Graph.from_edges(num_leaves + 1, [(0, leaf, 1.0) for leaf in range(1, num_leaves + 1)])


def random_graph(
    rng: np.random.Generator,
    num_vertices: int,
    edge_probability: float = 0.3,
    weighted: bool = True,
    connected: bool = True,
    min_weight: float = 0.1,
    max_weight: float = 1.0,
) -> Graph:
    """
    Erdos-Renyi style random graph.

    With `connected=True` a random spanning path is added first, so the
    graph is connected whatever the edge probability.

    Args:
        rng: numpy Generator
        num_vertices: N
        edge_probability: Probability of each extra edge
        weighted: Uniform weights in [min_weight, max_weight] when True, 1.0 otherwise
        connected: Force connectivity
    """
    if num_vertices < 1:
        raise GraphError('num_vertices must be positive')

    def draw_weight() -> float:
        return float(rng.uniform(min_weight, max_weight)) if weighted else 1.0

    edges = []
    if connected and num_vertices > 1:
        order = rng.permutation(num_vertices)
        edges.extend((int(a), int(b), draw_weight()) for a, b in zip(order[:-1], order[1:]))
    for i in range(num_vertices):
        for j in range(i + 1, num_vertices):
            if rng.random() < edge_probability:
                edges.append((i, j, draw_weight()))
    return Graph.from_edges(num_vertices, edges)


def random_labeled_set(
    rng: np.random.Generator,
    component_of: np.ndarray,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    Random labeled set touching every component.

    One vertex per component is drawn first; the rest are uniform among
    the remaining vertices.
    """
    num_vertices = len(component_of)
    chosen = []
    for component in np.unique(component_of):
        members = np.flatnonzero(component_of == component)
        chosen.append(int(rng.choice(members)))
    target = size if size is not None else int(rng.integers(len(chosen), num_vertices + 1))
    target = max(target, len(chosen))
    rest = np.setdiff1d(np.arange(num_vertices), chosen)
    extra = rng.choice(rest, size=min(target - len(chosen), len(rest)), replace=False)
    return np.sort(np.concatenate([np.asarray(chosen, dtype=int), extra.astype(int)]))
