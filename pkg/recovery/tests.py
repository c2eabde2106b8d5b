"""
Tests for the regularization map and its supporting types.
"""

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from graph_core import Graph, UnobservedComponentError, build_laplacian
from graph_core.generators import complete_graph, path_graph

from .fixtures import random_instance
from .regularization import (
    EpsRule,
    ModelParams,
    Observation,
    QuantityOfInterest,
    RecoveryError,
    apply_qoi,
    harmonic_interpolate,
    harmonic_matrix,
    limit_tau_zero,
    regularize,
    regularize_with_limits,
    regularizer_matrix,
    regularizer_matrix_with_limits,
    smoothness_budget,
)


def least_squares_oracle(bundle, obs, tau):
    """Minimize (1-tau)||L^{1/2} f||^2 + tau ||f[V_l] - y||^2 as one stacked least-squares problem."""
    selector = np.eye(bundle.num_vertices)[obs.labeled]
    design = np.vstack([np.sqrt(1 - tau) * bundle.sqrt_laplacian, np.sqrt(tau) * selector])
    target = np.concatenate([np.zeros(bundle.num_vertices), np.sqrt(tau) * obs.values])
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    return solution


class ObservationTest(SimpleTestCase):

    def test_restrict_and_lift(self):
        obs = Observation([2, 0], [5.0, 7.0])
        assert_array_equal(obs.restrict(np.array([1.0, 2.0, 3.0])), [3.0, 1.0])
        assert_array_equal(obs.lift(np.array([5.0, 7.0]), 3), [7.0, 0.0, 5.0])
        assert_array_equal(obs.unlabeled(4), [1, 3])

    def test_lift_then_restrict_is_identity(self):
        obs = Observation([3, 1, 4], [0.0, 0.0, 0.0])
        a = np.array([1.5, -2.0, 0.25])
        assert_array_equal(obs.restrict(obs.lift(a, 6)), a)

    def test_rejects_duplicates(self):
        with self.assertRaises(RecoveryError):
            Observation([1, 1], [0.0, 1.0])

    def test_rejects_empty(self):
        with self.assertRaises(RecoveryError):
            Observation([], [])

    def test_rejects_length_mismatch(self):
        with self.assertRaises(RecoveryError):
            Observation([0, 1], [0.0])

    def test_out_of_range_vertex(self):
        bundle = build_laplacian(path_graph(3))
        with self.assertRaises(RecoveryError):
            regularize(bundle, Observation([5], [1.0]), 0.5)


class QuantityOfInterestTest(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(QuantityOfInterest.parse('vertex:3').index, 3)
        self.assertEqual(QuantityOfInterest.parse('Average').variant, 'average')
        self.assertEqual(str(QuantityOfInterest.parse('vertex:7')), 'vertex:7')

    def test_parse_rejects_garbage(self):
        for text in ('vertex:', 'vertex:x', 'median', ''):
            with self.assertRaises(RecoveryError):
                QuantityOfInterest.parse(text)

    def test_materialize(self):
        assert_array_equal(QuantityOfInterest.full().materialize(3), np.eye(3))
        assert_allclose(QuantityOfInterest.average().materialize(4), [[0.25] * 4])
        assert_array_equal(QuantityOfInterest.vertex(1).materialize(3), [[0, 1, 0]])
        assert_array_equal(
            QuantityOfInterest.unlabeled().materialize(3, [0]), [[0, 1, 0], [0, 0, 1]]
        )

    def test_unlabeled_needs_labeled_set(self):
        with self.assertRaises(RecoveryError):
            QuantityOfInterest.unlabeled().materialize(3)

    def test_apply_qoi_examples(self):
        f = np.array([1.0, 2.0, 3.0])
        assert_allclose(apply_qoi(QuantityOfInterest.average(), f), [2.0])
        assert_allclose(apply_qoi(QuantityOfInterest.vertex(2), f), [3.0])
        assert_allclose(apply_qoi(QuantityOfInterest.unlabeled(), f, labeled=[0]), [2.0, 3.0])

    def test_apply_qoi_dimension_mismatch(self):
        q = QuantityOfInterest.matrix(np.ones((2, 4)))
        with self.assertRaises(RecoveryError):
            apply_qoi(q, np.ones(3))
        with self.assertRaises(RecoveryError):
            apply_qoi(QuantityOfInterest.vertex(5), np.ones(3))


class ModelParamsTest(SimpleTestCase):

    def test_budgets_must_be_positive(self):
        for epsilon, eta in [(0.0, 1.0), (1.0, -1.0), (np.inf, 1.0), (np.nan, 1.0)]:
            with self.assertRaises(RecoveryError):
                ModelParams(epsilon, eta)

    def test_scaled(self):
        params = ModelParams(1.0, 2.0).scaled(eta_factor=3.0)
        self.assertEqual((params.epsilon, params.eta), (1.0, 6.0))

    def test_smoothness_budget_rules(self):
        bundle = build_laplacian(path_graph(3))
        f = np.array([0.0, 1.0, 3.0])
        # ||L^{1/2} f||^2 = 1 + 4
        self.assertAlmostEqual(smoothness_budget(bundle, f, EpsRule('literal_squared')), 10.0)
        self.assertAlmostEqual(smoothness_budget(bundle, f, EpsRule('linear_2x')), 2 * np.sqrt(5.0))
        self.assertEqual(smoothness_budget(bundle, f, EpsRule('explicit', 0.7)), 0.7)

    def test_eps_rule_validation(self):
        with self.assertRaises(RecoveryError):
            EpsRule('quadratic')
        with self.assertRaises(RecoveryError):
            EpsRule('explicit')
        self.assertEqual(EpsRule('explicit', 2.0).to_json(), {'explicit': 2.0})
        self.assertEqual(EpsRule().to_json(), 'literal_squared')


class RegularizeTest(SimpleTestCase):
    """Tests for regularize and regularizer_matrix."""

    def test_constants_are_reproduced(self):
        bundle = build_laplacian(complete_graph(5))
        obs = Observation([0, 3], [1.0, 1.0])
        for tau in (1e-6, 0.3, 0.5, 0.999999):
            assert_allclose(regularize(bundle, obs, tau), np.ones(5), atol=1e-8)

    def test_zero_labels(self):
        bundle = build_laplacian(path_graph(4))
        obs = Observation([1], [0.0])
        for tau in (0.1, 0.9):
            assert_array_equal(regularize(bundle, obs, tau), np.zeros(4))

    def test_path_matches_least_squares(self):
        bundle = build_laplacian(path_graph(3))
        obs = Observation([0, 2], [0.0, 1.0])
        f = regularize(bundle, obs, 0.5)
        assert_allclose(f, least_squares_oracle(bundle, obs, 0.5), atol=1e-10)
        assert_allclose(f, [0.25, 0.5, 0.75], atol=1e-12)

    def test_normal_equation_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            instance = random_instance(rng, max_vertices=25)
            bundle, obs = instance.bundle, instance.obs
            tau = float(rng.uniform(0.01, 0.99))
            f = regularize(bundle, obs, tau)
            system = (1 - tau) * bundle.laplacian + tau * np.diag(obs.mask(bundle.num_vertices))
            residual = system @ f - tau * obs.lift(obs.values, bundle.num_vertices)
            self.assertLessEqual(np.linalg.norm(residual), 1e-10 * (1 + np.linalg.norm(obs.values)))
            assert_allclose(f, least_squares_oracle(bundle, obs, tau), atol=1e-8)

    def test_tau_must_be_open(self):
        bundle = build_laplacian(path_graph(3))
        obs = Observation([0], [1.0])
        for tau in (0.0, 1.0, -0.5, 2.0):
            with self.assertRaises(RecoveryError):
                regularize(bundle, obs, tau)

    def test_unobserved_component(self):
        bundle = build_laplacian(Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))
        with self.assertRaises(UnobservedComponentError):
            regularize(bundle, Observation([0, 1], [1.0, 2.0]), 0.5)

    def test_matrix_reproduces_regularize(self):
        rng = np.random.default_rng(5)
        instance = random_instance(rng, min_vertices=10, max_vertices=20)
        bundle, obs = instance.bundle, instance.obs
        matrix = regularizer_matrix(bundle, obs, 0.4)
        self.assertEqual(matrix.shape, (bundle.num_vertices, obs.num_labeled))
        for _ in range(20):
            y = rng.normal(size=obs.num_labeled)
            expected = regularize(bundle, obs.with_values(y), 0.4)
            self.assertLessEqual(np.max(np.abs(matrix @ y - expected)), 1e-10)

    def test_matrix_approaches_identity_when_all_labeled(self):
        bundle = build_laplacian(path_graph(5))
        order = [4, 2, 0, 1, 3]
        obs = Observation(order, np.zeros(5))
        matrix = regularizer_matrix(bundle, obs, 1 - 1e-8)
        assert_allclose(matrix[order], np.eye(5), atol=1e-6)


class LimitMapsTest(SimpleTestCase):
    """Tests for the tau -> 0 and tau -> 1 limits."""

    def test_tau_zero_connected(self):
        bundle = build_laplacian(path_graph(4))
        obs = Observation([0, 3], [1.0, 2.0])
        assert_allclose(limit_tau_zero(obs, bundle.component_of), np.full(4, 1.5))

    def test_tau_zero_componentwise_mean(self):
        bundle = build_laplacian(Graph.from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]))
        obs = Observation([0, 2, 4], [1.0, 3.0, 5.0])
        assert_allclose(limit_tau_zero(obs, bundle.component_of), [1, 1, 4, 4, 4])

    def test_tau_zero_unobserved(self):
        bundle = build_laplacian(Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))
        with self.assertRaises(UnobservedComponentError):
            limit_tau_zero(Observation([0], [1.0]), bundle.component_of)

    def test_tau_zero_is_the_limit(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            instance = random_instance(rng, connected=bool(rng.random() < 0.5))
            bundle, obs = instance.bundle, instance.obs
            assert_allclose(
                regularize(bundle, obs, 1e-6), limit_tau_zero(obs, bundle.component_of), atol=1e-3
            )

    def test_harmonic_path(self):
        bundle = build_laplacian(path_graph(3))
        assert_allclose(harmonic_interpolate(bundle, Observation([0, 2], [0.0, 1.0])), [0, 0.5, 1])

    def test_harmonic_all_labeled(self):
        bundle = build_laplacian(complete_graph(4))
        obs = Observation([3, 1, 0, 2], [0.1, 0.2, 0.3, 0.4])
        assert_allclose(harmonic_interpolate(bundle, obs), [0.3, 0.2, 0.4, 0.1])

    def test_harmonic_is_the_limit(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            instance = random_instance(rng, max_vertices=30)
            bundle, obs = instance.bundle, instance.obs
            f1 = harmonic_interpolate(bundle, obs)
            self.assertLessEqual(np.max(np.abs(obs.restrict(f1) - obs.values)), 1e-10)
            assert_allclose(regularize(bundle, obs, 1 - 1e-8), f1, atol=1e-4)

    def test_with_limits_dispatch(self):
        bundle = build_laplacian(path_graph(3))
        obs = Observation([0, 2], [0.0, 1.0])
        assert_allclose(regularize_with_limits(bundle, obs, 0.0), [0.5, 0.5, 0.5])
        assert_allclose(regularize_with_limits(bundle, obs, 1.0), [0, 0.5, 1])
        assert_allclose(regularize_with_limits(bundle, obs, 0.5), regularize(bundle, obs, 0.5))

    def test_limit_matrices(self):
        bundle = build_laplacian(Graph.from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]))
        obs = Observation([0, 2, 4], [1.0, 3.0, 5.0])
        assert_allclose(
            regularizer_matrix_with_limits(bundle, obs, 0.0) @ obs.values,
            limit_tau_zero(obs, bundle.component_of),
        )
        assert_allclose(
            regularizer_matrix_with_limits(bundle, obs, 1.0), harmonic_matrix(bundle, obs)
        )
