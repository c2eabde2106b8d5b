"""
Random recovery instances for the property suites of the numeric apps.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from graph_core import LaplacianBundle, build_laplacian
from graph_core.generators import random_graph, random_labeled_set

from .regularization import ModelParams, Observation


@dataclass(frozen=True, eq=False)
class RandomInstance:
    bundle: LaplacianBundle
    obs: Observation
    params: ModelParams


def random_instance(
    rng: np.random.Generator,
    min_vertices: int = 3,
    max_vertices: int = 12,
    connected: bool = True,
    num_labeled: Optional[int] = None,
    params: Optional[ModelParams] = None,
) -> RandomInstance:
    """
    A random weighted graph, labeled set, observed values and budgets.

    Observed values are uniform in [0, 1]; budgets are log-uniform in
    [0.1, 10] unless `params` is given. One vertex per component is
    always labeled, so a disconnected graph may end up fully labeled.
    """
    num_vertices = int(rng.integers(min_vertices, max_vertices + 1))
    graph = random_graph(
        rng, num_vertices, edge_probability=float(rng.uniform(0.1, 0.5)), connected=connected
    )
    bundle = build_laplacian(graph)
    size = num_labeled
    if size is None:
        size = int(rng.integers(1, num_vertices))
    labeled = random_labeled_set(rng, bundle.component_of, min(size, num_vertices - 1))
    labeled = rng.permutation(labeled)
    values = rng.random(labeled.size)
    if params is None:
        params = ModelParams(
            epsilon=float(10 ** rng.uniform(-1, 1)),
            eta=float(10 ** rng.uniform(-1, 1)),
        )
    return RandomInstance(bundle=bundle, obs=Observation(labeled, values), params=params)


def consistent_instance(
    rng: np.random.Generator,
    instance: RandomInstance,
    fill: float = 0.9,
):
    """
    Replace the observed values by labels of a model-consistent pair.

    Draws a signal with ||L^{1/2} f|| = fill * eps and noise with
    ||e|| = fill * eta, and returns (instance, f, e) with y = f[V_l] + e.
    """
    bundle, obs, params = instance.bundle, instance.obs, instance.params
    f = rng.normal(size=bundle.num_vertices)
    energy = bundle.energy_norm(f)
    if energy > 0:
        f *= fill * params.epsilon / energy
    e = rng.normal(size=obs.num_labeled)
    e *= fill * params.eta / np.linalg.norm(e)
    values = obs.restrict(f) + e
    return RandomInstance(bundle=bundle, obs=obs.with_values(values), params=params), f, e
