"""
Tests for graph_core.
"""

import numpy as np
from django.core.cache import cache
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_allclose, assert_array_equal

from .cache_utils import cached_laplacian, invalidate_laplacian, laplacian_cache_key
from .generators import complete_graph, path_graph, random_graph, random_labeled_set
from .graph import Graph, GraphError, build_clique_union, connected_components, largest_component
from .laplacian import (
    GraphTooLargeError,
    UnobservedComponentError,
    build_laplacian,
    validate_observability,
)


def two_disjoint_edges() -> Graph:
    return Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])


class GraphConstructionTest(SimpleTestCase):
    """Tests for Graph.from_edges canonicalization."""

    def test_edges_are_canonical(self):
        graph = Graph.from_edges(3, [(2, 0, 1.0), (1, 0, 2.0)])
        self.assertEqual(graph.edges, ((0, 1, 2.0), (0, 2, 1.0)))

    def test_self_loops_dropped_with_warning(self):
        with self.assertLogs('graph_core.graph', level='WARNING') as logs:
            graph = Graph.from_edges(2, [(0, 0, 1.0), (0, 1, 1.0)])
        self.assertEqual(graph.num_edges, 1)
        self.assertIn('GRAPH-BUILD01', logs.output[0])

    def test_duplicate_edges_summed(self):
        with self.assertLogs('graph_core.graph', level='WARNING') as logs:
            graph = Graph.from_edges(2, [(0, 1, 1.0), (1, 0, 0.5)])
        self.assertEqual(graph.edges, ((0, 1, 1.5),))
        self.assertIn('GRAPH-BUILD02', logs.output[0])

    def test_out_of_range_rejected(self):
        with self.assertRaises(GraphError):
            Graph.from_edges(2, [(0, 2, 1.0)])

    def test_negative_weight_rejected(self):
        with self.assertRaises(GraphError):
            Graph.from_edges(2, [(0, 1, -1.0)])

    def test_vertex_count_must_be_positive(self):
        with self.assertRaises(GraphError):
            Graph.from_edges(0, [])

    def test_adjacency_is_symmetric(self):
        graph = Graph.from_edges(3, [(0, 1, 2.0), (1, 2, 0.5)])
        weights = graph.adjacency()
        assert_array_equal(weights, weights.T)
        assert_allclose(graph.degrees(), weights.sum(axis=1))

    def test_dict_round_trip(self):
        graph = Graph.from_edges(3, [(0, 1, 2.0)], vertex_names=['a', 'b', 'c'])
        self.assertEqual(Graph.from_dict(graph.to_dict()), graph)

    def test_digest_depends_on_weights(self):
        self.assertNotEqual(
            Graph.from_edges(2, [(0, 1, 1.0)]).digest(),
            Graph.from_edges(2, [(0, 1, 2.0)]).digest(),
        )


class ConnectedComponentsTest(SimpleTestCase):

    def test_triangle_is_connected(self):
        count, _ = connected_components(complete_graph(3))
        self.assertEqual(count, 1)

    def test_two_disjoint_edges(self):
        count, component_of = connected_components(two_disjoint_edges())
        self.assertEqual(count, 2)
        assert_array_equal(component_of, [0, 0, 1, 1])

    def test_clique_union_components(self):
        count, _ = connected_components(build_clique_union(3, 4))
        self.assertEqual(count, 3)

    def test_zero_weight_edges_do_not_connect(self):
        count, _ = connected_components(Graph.from_edges(2, [(0, 1, 0.0)]))
        self.assertEqual(count, 2)

    def test_largest_component_keeps_order(self):
        graph = Graph.from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 2.0)], vertex_names='abcde')
        reduced = largest_component(graph)
        self.assertEqual(reduced.num_vertices, 3)
        self.assertEqual(reduced.edges, ((0, 1, 1.0), (1, 2, 2.0)))
        self.assertEqual(reduced.vertex_names, ('c', 'd', 'e'))


class BuildLaplacianTest(SimpleTestCase):
    """Tests for build_laplacian."""

    def test_triangle(self):
        bundle = build_laplacian(complete_graph(3))
        assert_allclose(bundle.laplacian, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])
        assert_allclose(bundle.eigenvalues, [0, 3, 3], atol=1e-12)
        self.assertEqual(bundle.num_components, 1)

    def test_two_disjoint_edges(self):
        bundle = build_laplacian(two_disjoint_edges())
        self.assertEqual(bundle.num_components, 2)
        self.assertEqual(int(np.sum(~bundle.positive_mask)), 2)
        self.assertEqual(bundle.kernel_basis.shape, (4, 2))

    def test_clique_eigenvalues(self):
        bundle = build_laplacian(build_clique_union(1, 5))
        assert_allclose(bundle.eigenvalues, [0, 5, 5, 5, 5], atol=1e-12)

    def test_single_edge_projector(self):
        bundle = build_laplacian(build_clique_union(1, 2))
        projector = bundle.laplacian / 2
        assert_allclose(projector, [[0.5, -0.5], [-0.5, 0.5]])
        assert_allclose(projector @ projector, projector, atol=1e-12)

    def test_clique_union_projector(self):
        for num_cliques, size in [(2, 3), (3, 4), (1, 6)]:
            bundle = build_laplacian(build_clique_union(num_cliques, size))
            projector = bundle.laplacian / size
            self.assertLessEqual(np.max(np.abs(projector @ projector - projector)), 1e-10)

    def test_clique_union_rejects_bad_sizes(self):
        with self.assertRaises(GraphError):
            build_clique_union(0, 3)
        with self.assertRaises(GraphError):
            build_clique_union(2, 1)

    def test_dense_limit(self):
        with self.assertRaises(GraphTooLargeError) as ctx:
            build_laplacian(path_graph(10), dense_limit=5)
        self.assertIn('too large for dense mode', str(ctx.exception))

    @override_settings(GRAPH_DENSE_VERTEX_LIMIT=3)
    def test_dense_limit_from_settings(self):
        with self.assertRaises(GraphTooLargeError):
            build_laplacian(path_graph(4))

    def test_whitening_gives_pseudoinverse(self):
        bundle = build_laplacian(two_disjoint_edges())
        white = bundle.whitening()
        assert_allclose(white @ white.T, np.linalg.pinv(bundle.laplacian), atol=1e-12)


class LaplacianPropertiesTest(SimpleTestCase):
    """Invariants on random graphs."""

    def test_random_graph_invariants(self):
        rng = np.random.default_rng(20240601)
        for _ in range(100):
            num_vertices = int(rng.integers(2, 41))
            graph = random_graph(
                rng, num_vertices,
                edge_probability=float(rng.uniform(0.02, 0.3)),
                connected=bool(rng.random() < 0.5),
            )
            bundle = build_laplacian(graph)
            lambda_max = max(bundle.lambda_max, 1.0)

            count, _ = connected_components(graph)
            self.assertEqual(int(np.sum(~bundle.positive_mask)), count)
            self.assertEqual(bundle.num_components, count)

            self.assertGreaterEqual(bundle.eigenvalues[0], -1e-10 * lambda_max)
            self.assertLessEqual(np.max(np.abs(bundle.laplacian.sum(axis=1))), 1e-10)

            root = bundle.sqrt_laplacian
            assert_allclose(root, root.T, atol=1e-12)
            self.assertLessEqual(np.max(np.abs(root @ root - bundle.laplacian)), 1e-8 * lambda_max)

            chi = bundle.eigenvectors
            assert_allclose(chi.T @ chi, np.eye(num_vertices), atol=1e-10)
            assert_allclose(
                (chi * bundle.eigenvalues) @ chi.T, bundle.laplacian, atol=1e-9 * lambda_max
            )

    def test_kernel_dimension_equals_components_across_seeds(self):
        for seed in range(1, 11):
            rng = np.random.default_rng(seed)
            for _ in range(100):
                num_vertices = int(rng.integers(2, 13))
                graph = random_graph(
                    rng, num_vertices,
                    edge_probability=float(rng.uniform(0.05, 0.6)),
                    connected=bool(rng.random() < 0.7),
                )
                bundle = build_laplacian(graph)
                count, component_of = connected_components(graph)

                kernel = bundle.kernel_basis
                self.assertEqual(kernel.shape, (num_vertices, count))
                assert_array_equal(bundle.eigenvalues[:count], 0.0)
                self.assertTrue(np.all(bundle.eigenvalues[count:] > 0.0))
                self.assertLessEqual(np.max(np.abs(bundle.laplacian @ kernel)), 1e-10)

                # the kernel is spanned by the component indicators
                indicators = (component_of[:, None] == np.arange(count)[None, :]).astype(float)
                projected = kernel @ (kernel.T @ indicators)
                assert_allclose(projected, indicators, atol=1e-8)

    def test_random_labeled_set_covers_components(self):
        rng = np.random.default_rng(3)
        graph = random_graph(rng, 20, edge_probability=0.05, connected=False)
        bundle = build_laplacian(graph)
        labeled = random_labeled_set(rng, bundle.component_of)
        validate_observability(bundle, labeled)


class ValidateObservabilityTest(SimpleTestCase):

    def setUp(self):
        self.bundle = build_laplacian(two_disjoint_edges())

    def test_one_label_per_component(self):
        validate_observability(self.bundle, [0, 2])

    def test_unobserved_component_named(self):
        with self.assertRaises(UnobservedComponentError) as ctx:
            validate_observability(self.bundle, [0, 1])
        self.assertEqual(ctx.exception.components, [1])
        self.assertIn('unobserved component', str(ctx.exception))

    def test_empty_labeled_set(self):
        with self.assertRaises(GraphError):
            validate_observability(self.bundle, [])

    def test_out_of_range_label(self):
        with self.assertRaises(GraphError):
            validate_observability(self.bundle, [0, 7])

    def test_connected_graph_any_label(self):
        bundle = build_laplacian(path_graph(6))
        for vertex in range(6):
            validate_observability(bundle, [vertex])


class LaplacianCacheTest(SimpleTestCase):

    def setUp(self):
        cache.clear()

    def test_cache_hit_returns_equal_bundle(self):
        graph = path_graph(5)
        first = cached_laplacian(graph)
        self.assertIsNotNone(cache.get(laplacian_cache_key(graph)))
        second = cached_laplacian(graph)
        assert_allclose(first.eigenvalues, second.eigenvalues)

    def test_invalidate(self):
        graph = path_graph(4)
        cached_laplacian(graph)
        invalidate_laplacian(graph)
        self.assertIsNone(cache.get(laplacian_cache_key(graph)))
