"""
Tests for the local worst-case error bound and the feasible-set sampler.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_allclose

from experiments.noise import gen_noise
from experiments.synthesis import make_rng, synth_signal, trial_seed
from graph_core import Graph, build_laplacian
from graph_core.generators import path_graph
from io_formats import load_graph, resolve_dataset_path
from param_select import solve_local
from recovery import EpsRule, ModelParams, Observation, QuantityOfInterest, regularize, smoothness_budget
from recovery.fixtures import consistent_instance, random_instance
from spectral import SpectralError

from .bound import LwceProblem, lwce_curve, lwce_gamma, lwce_upper_bound
from .sampling import enclosing_ball_center, sample_feasible_signals, sampled_lwce


def k2_bundle():
    return build_laplacian(Graph.from_edges(2, [(0, 1, 1.0)]))


class LwceGammaTest(SimpleTestCase):
    """gamma(c, d) at fixed multipliers."""

    def test_schur_term_vanishes_when_w_is_zero(self):
        # Q = I, y = 1 at vertex 0, d = 3: z = d * Lambda^* y gives w = 0
        bundle = k2_bundle()
        obs = Observation([0], [1.0])
        z = np.array([3.0, 0.0])
        gamma = lwce_gamma(bundle, obs, QuantityOfInterest.full(), z, ModelParams(1.0, 1.0), 3.0, 3.0)
        self.assertAlmostEqual(gamma, 9.0 + 3.0 - 3.0 * (1.0 - 1.0), places=10)

    def test_zero_observation_and_estimate(self):
        bundle = k2_bundle()
        obs = Observation([0], [0.0])
        params = ModelParams(0.5, 2.0)
        gamma = lwce_gamma(bundle, obs, QuantityOfInterest.unlabeled(), np.zeros(1), params, 4.0, 4.0)
        self.assertAlmostEqual(gamma, 4.0 * 0.25 + 4.0 * 4.0, places=10)

    def test_singular_constraint_uses_pseudoinverse(self):
        # S(2, 2) = [[4, -2], [-2, 1]] is singular; w = (-2, 1) lies in its range
        bundle = k2_bundle()
        obs = Observation([0], [1.0])
        params = ModelParams(1.0, 1.0)
        gamma = lwce_gamma(bundle, obs, QuantityOfInterest.unlabeled(), np.array([1.0]), params, 2.0, 2.0)
        self.assertAlmostEqual(gamma, 4.0, places=8)

    def test_outside_range_is_infinite(self):
        bundle = k2_bundle()
        obs = Observation([0], [1.0])
        params = ModelParams(1.0, 1.0)
        gamma = lwce_gamma(bundle, obs, QuantityOfInterest.unlabeled(), np.array([0.0]), params, 2.0, 2.0)
        self.assertEqual(gamma, float('inf'))

    def test_indefinite_constraint_is_infinite(self):
        bundle = k2_bundle()
        obs = Observation([0], [1.0])
        gamma = lwce_gamma(
            bundle, obs, QuantityOfInterest.unlabeled(), np.array([1.0]), ModelParams(1.0, 1.0), 0.1, 0.1
        )
        self.assertEqual(gamma, float('inf'))


class LwceUpperBoundTest(SimpleTestCase):

    def test_k2_bound_is_tight(self):
        # |f1 - 1| <= |f1 - f0| + |f0 - 1| <= 2, attained at f = (2, 3)
        result = lwce_upper_bound(
            k2_bundle(), Observation([0], [1.0]), QuantityOfInterest.unlabeled(),
            np.array([1.0]), ModelParams(1.0, 1.0),
        )
        self.assertTrue(result.feasible)
        self.assertLess(abs(result.gamma - 4.0), 4e-3)
        self.assertAlmostEqual(result.bound, np.sqrt(result.gamma))

    def test_certificate_matrix_is_psd(self):
        bundle = build_laplacian(path_graph(4))
        obs = Observation([0, 3], [0.2, 0.9])
        params = ModelParams(1.0, 0.5)
        problem = LwceProblem(bundle, obs, QuantityOfInterest.unlabeled(), params)
        z = problem.qoi_matrix @ regularize(bundle, obs, 0.4)
        result = problem.upper_bound(z)
        certificate = problem.certificate_matrix(z, result.c_star, result.d_star, result.gamma)
        self.assertGreaterEqual(np.linalg.eigvalsh(certificate)[0], -1e-8)
        self.assertGreaterEqual(result.c_star, 0.0)
        self.assertGreaterEqual(result.d_star, 0.0)

    @override_settings(LWCE_MULTIPLIER_MAX=1e-3)
    def test_infeasible_within_multiplier_bounds(self):
        result = lwce_upper_bound(
            k2_bundle(), Observation([0], [1.0]), QuantityOfInterest.unlabeled(),
            np.array([1.0]), ModelParams(1.0, 1.0),
        )
        self.assertFalse(result.feasible)
        self.assertEqual(result.bound, float('inf'))

    def test_dimension_mismatch(self):
        with self.assertRaises(SpectralError):
            lwce_upper_bound(
                k2_bundle(), Observation([0], [1.0]), QuantityOfInterest.unlabeled(),
                np.array([1.0, 2.0]), ModelParams(1.0, 1.0),
            )


class LwceCurveTest(SimpleTestCase):

    def test_singleton_grid(self):
        bundle = build_laplacian(path_graph(3))
        points = lwce_curve(
            bundle, Observation([0, 2], [0.0, 1.0]), QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0), [0.3]
        )
        self.assertEqual(len(points), 1)
        self.assertEqual(points[0].tau, 0.3)

    def test_points_sorted_by_tau(self):
        bundle = build_laplacian(path_graph(3))
        points = lwce_curve(
            bundle, Observation([0, 2], [0.0, 1.0]), QuantityOfInterest.unlabeled(),
            ModelParams(1.0, 1.0), [0.8, 0.1, 0.5],
        )
        self.assertEqual([point.tau for point in points], [0.1, 0.5, 0.8])

    def test_constant_labels_give_flat_curve(self):
        bundle = build_laplacian(path_graph(5))
        obs = Observation([0, 2, 4], [0.7, 0.7, 0.7])
        points = lwce_curve(
            bundle, obs, QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0), np.linspace(0.1, 0.9, 5)
        )
        gammas = np.array([point.gamma for point in points])
        assert_allclose(gammas, gammas[0], rtol=1e-6)


class SamplingTest(SimpleTestCase):

    def test_samples_are_feasible(self):
        rng = np.random.default_rng(31)
        bundle = build_laplacian(path_graph(4))
        obs = Observation([0, 3], [0.1, 0.8])
        params = ModelParams(1.0, 0.5)
        samples = sample_feasible_signals(bundle, obs, params, 2000, rng)
        self.assertEqual(samples.shape, (2000, 4))
        energies = np.einsum('ij,jk,ik->i', samples, bundle.laplacian, samples)
        misfits = np.sum((samples[:, obs.labeled] - obs.values) ** 2, axis=1)
        self.assertLessEqual(np.max(energies), 1.0 + 1e-9)
        self.assertLessEqual(np.max(misfits), 0.25 + 1e-9)

    def test_boundary_samples_touch_a_constraint(self):
        rng = np.random.default_rng(32)
        bundle = build_laplacian(path_graph(4))
        obs = Observation([0, 3], [0.1, 0.8])
        params = ModelParams(1.0, 0.5)
        samples = sample_feasible_signals(bundle, obs, params, 100, rng, boundary_fraction=1.0)
        energies = np.einsum('ij,jk,ik->i', samples, bundle.laplacian, samples)
        misfits = np.sum((samples[:, obs.labeled] - obs.values) ** 2, axis=1)
        active = np.maximum(energies / 1.0, misfits / 0.25)
        assert_allclose(active, 1.0, atol=1e-8)

    def test_inconsistent_labels_give_no_samples(self):
        rng = np.random.default_rng(33)
        bundle = k2_bundle()
        obs = Observation([0, 1], [0.0, 10.0])
        with self.assertLogs('lwce_bound.sampling', level='WARNING'):
            samples = sample_feasible_signals(bundle, obs, ModelParams(0.1, 0.1), 10, rng)
        self.assertEqual(samples.shape, (0, 2))
        self.assertEqual(sampled_lwce(samples, np.eye(2), np.zeros(2)), 0.0)

    def test_sampled_lwce(self):
        samples = np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]])
        self.assertAlmostEqual(sampled_lwce(samples, np.eye(2), np.zeros(2)), 5.0)
        self.assertAlmostEqual(sampled_lwce(samples, np.array([[1.0, 0.0]]), np.array([1.0])), 2.0)

    def test_enclosing_ball_of_square(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]])
        center, radius = enclosing_ball_center(points)
        optimal = np.sqrt(0.5)
        self.assertGreaterEqual(radius, optimal - 1e-12)
        self.assertLessEqual(radius, 1.04 * optimal)
        assert_allclose(center, [0.5, 0.5], atol=0.05)


@pytest.mark.slow
class LwceDominanceTest(SimpleTestCase):
    """The bound dominates every sampled data-consistent error."""

    def test_bound_dominates_samples(self):
        rng = np.random.default_rng(34)
        q = QuantityOfInterest.unlabeled()
        for _ in range(50):
            instance, _, _ = consistent_instance(rng, random_instance(rng, min_vertices=3, max_vertices=3))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            problem = LwceProblem(bundle, obs, q, params)
            z = problem.qoi_matrix @ regularize(bundle, obs, float(rng.uniform(0.05, 0.95)))
            result = problem.upper_bound(z)
            samples = sample_feasible_signals(bundle, obs, params, 100000, rng)
            self.assertGreater(samples.shape[0], 0)
            self.assertLessEqual(sampled_lwce(samples, problem.qoi_matrix, z) ** 2, result.gamma + 1e-6)
            certificate = problem.certificate_matrix(z, result.c_star, result.d_star, result.gamma)
            self.assertGreaterEqual(np.linalg.eigvalsh(certificate)[0], -1e-8)

    def test_bound_grows_with_eta(self):
        rng = np.random.default_rng(35)
        q = QuantityOfInterest.unlabeled()
        for _ in range(20):
            instance, _, _ = consistent_instance(rng, random_instance(rng, max_vertices=8))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            z = LwceProblem(bundle, obs, q, params).qoi_matrix @ regularize(bundle, obs, 0.5)
            small = lwce_upper_bound(bundle, obs, q, z, params)
            large = lwce_upper_bound(bundle, obs, q, z, params.scaled(eta_factor=2.0))
            self.assertGreaterEqual(large.gamma, small.gamma - 1e-6 * (1.0 + small.gamma))

    def test_balancing_parameter_near_curve_minimum(self):
        rng = np.random.default_rng(36)
        q = QuantityOfInterest.unlabeled()
        hits = 0
        trials = 20
        for _ in range(trials):
            instance, _, _ = consistent_instance(rng, random_instance(rng, min_vertices=5, max_vertices=10))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            tau_natural = solve_local(bundle, obs, params).tau_natural
            curve = lwce_curve(bundle, obs, q, params, np.linspace(0.02, 0.98, 49))
            at_natural = lwce_curve(bundle, obs, q, params, [tau_natural])[0]
            best = min(point.gamma for point in curve)
            if np.sqrt(at_natural.gamma) <= 2.0 * np.sqrt(best) + 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, int(0.9 * trials))


@pytest.mark.integration
class AdjnounCurveTest(SimpleTestCase):
    """The balancing parameter against the lwce curve on the adjnoun network."""

    num_trials = 20
    num_labeled = 20
    eta = 2.0

    def setUp(self):
        if not resolve_dataset_path('adjnoun').exists():
            self.skipTest('adjnoun.mtx is not in DATASET_DIR')
        self.bundle = build_laplacian(load_graph('adjnoun'))

    def test_balancing_parameter_near_curve_minimum(self):
        q = QuantityOfInterest.unlabeled()
        taus = np.linspace(0.005, 0.995, 200)
        hits = 0
        for trial in range(self.num_trials):
            rng = make_rng(trial_seed(7, trial))
            signal = synth_signal(self.bundle, rng)
            epsilon = smoothness_budget(self.bundle, signal, EpsRule('literal_squared'))
            labeled = rng.permutation(self.bundle.num_vertices)[:self.num_labeled]
            noise = gen_noise('uniform_centered', self.eta, rng, labeled, self.bundle.degree)
            obs = Observation(labeled, signal[labeled] + noise)
            params = ModelParams(epsilon, self.eta)

            tau_natural = solve_local(self.bundle, obs, params).tau_natural
            best = min(point.gamma for point in lwce_curve(self.bundle, obs, q, params, taus))
            at_natural = lwce_curve(self.bundle, obs, q, params, [tau_natural])[0]
            if np.sqrt(at_natural.gamma) <= 2.0 * np.sqrt(best) + 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, int(np.ceil(0.95 * self.num_trials)))
