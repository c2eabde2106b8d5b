"""
Tests for global and local parameter selection, gwce evaluation and the
linear-functional fast path.
"""

from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from graph_core import Graph, UnobservedComponentError, build_laplacian
from graph_core.generators import complete_graph, path_graph
from recovery import ModelParams, Observation, QuantityOfInterest, RecoveryError, harmonic_interpolate
from spectral import FeasibilityContext, is_feasible, min_eig_constraint

from .functional import estimate_functional
from .global_select import InfeasibleProgramError, solve_global, verify_on_grid, wide_grid_optimum
from .gwce import evaluate_gwce_linear, gwce_split_bound
from .local_select import balance_function, minimax_objective, solve_local
from .search import SearchResult, logit_grid, minimize_on_unit_interval


def k2_bundle():
    return build_laplacian(Graph.from_edges(2, [(0, 1, 1.0)]))


def brute_force_k2(size=301):
    """min c + d over a (c, d) grid where c L + d e0 e0^T - e1 e1^T is PSD."""
    laplacian = np.array([[1.0, -1.0], [-1.0, 1.0]])
    best = np.inf
    for c in np.linspace(1.0, 4.0, size):
        for d in np.linspace(1.0, 4.0, size):
            matrix = c * laplacian + np.diag([d, -1.0])
            if np.linalg.eigvalsh(matrix)[0] >= -1e-12:
                best = min(best, c + d)
    return best


class SearchTest(SimpleTestCase):

    def test_logit_grid_is_symmetric(self):
        grid = logit_grid(9)
        self.assertEqual(len(grid), 9)
        self.assertAlmostEqual(grid[4], 0.5)
        assert_allclose(grid + grid[::-1], 1.0)

    def test_finds_interior_minimum(self):
        result = minimize_on_unit_interval(lambda t: (t - 0.3) ** 2, 64)
        self.assertAlmostEqual(result.t, 0.3, places=8)
        self.assertTrue(result.refined)

    def test_symmetric_objective_on_even_grid(self):
        # the two central grid points tie
        result = minimize_on_unit_interval(lambda t: (t - 0.5) ** 2, 64)
        self.assertAlmostEqual(result.t, 0.5, places=8)

    def test_infinite_everywhere(self):
        result = minimize_on_unit_interval(lambda t: float('inf'), 8)
        self.assertEqual(result.value, float('inf'))
        self.assertFalse(result.refined)


class SolveGlobalTest(SimpleTestCase):

    def test_k2_toy(self):
        solution = solve_global(
            k2_bundle(), Observation([0], [0.0]), QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0)
        )
        self.assertAlmostEqual(solution.tau_flat, 0.5, delta=1e-6)
        self.assertAlmostEqual(solution.gwce_sq_bound, 4.0, delta=1e-6)
        self.assertAlmostEqual(solution.c_flat, 2.0, delta=1e-5)
        self.assertAlmostEqual(solution.d_flat, 2.0, delta=1e-5)
        self.assertEqual(solution.regime, 'interior')
        self.assertTrue(solution.verified)
        self.assertAlmostEqual(solution.gwce_bound, 2.0, delta=1e-6)

    def test_k2_agrees_with_grid_oracle(self):
        oracle = brute_force_k2()
        solution = solve_global(k2_bundle(), [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0))
        self.assertLessEqual(solution.gwce_sq_bound, oracle + 1e-9)
        self.assertLess(oracle - solution.gwce_sq_bound, 0.02)

    def test_bare_labeled_set(self):
        solution = solve_global(k2_bundle(), [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0))
        self.assertEqual(solution.recovery_matrix.shape, (1, 1))

    def test_zero_quantity(self):
        bundle = build_laplacian(path_graph(4))
        q = QuantityOfInterest.matrix(np.zeros((2, 4)))
        solution = solve_global(bundle, [0, 2], q, ModelParams(1.0, 1.0))
        self.assertTrue(solution.degenerate)
        self.assertEqual(solution.gwce_sq_bound, 0.0)
        self.assertEqual((solution.c_flat, solution.d_flat, solution.tau_flat), (0.0, 0.0, 0.5))
        self.assertEqual(solution.recovery_matrix.shape, (2, 2))

    def test_doubling_budgets_scales_value(self):
        bundle = build_laplacian(path_graph(5))
        q = QuantityOfInterest.unlabeled()
        base = solve_global(bundle, [0, 3], q, ModelParams(0.7, 1.3))
        doubled = solve_global(bundle, [0, 3], q, ModelParams(1.4, 2.6))
        self.assertAlmostEqual(doubled.tau_flat, base.tau_flat, delta=1e-5)
        self.assertAlmostEqual(doubled.gwce_sq_bound, 4.0 * base.gwce_sq_bound, delta=1e-6 * doubled.gwce_sq_bound)

    def test_multipliers_are_feasible(self):
        bundle = build_laplacian(complete_graph(5))
        ctx = FeasibilityContext.build(bundle, [1, 4], QuantityOfInterest.unlabeled())
        solution = solve_global(bundle, [1, 4], QuantityOfInterest.unlabeled(), ModelParams(2.0, 0.3))
        scale = 1.0 + solution.c_flat * bundle.lambda_max + solution.d_flat
        self.assertGreaterEqual(min_eig_constraint(ctx, solution.c_flat, solution.d_flat), -1e-9 * scale)
        self.assertAlmostEqual(
            solution.tau_flat, solution.d_flat / (solution.c_flat + solution.d_flat), places=12
        )

    def test_labeled_reading_quantity_uses_harmonic_limit(self):
        bundle = build_laplacian(path_graph(3))
        params = ModelParams(1.0, 0.4)
        solution = solve_global(bundle, [1], QuantityOfInterest.vertex(1), params)
        self.assertEqual(solution.regime, 'tau_one')
        self.assertEqual(solution.tau_flat, 1.0)
        self.assertAlmostEqual(solution.gwce_sq_bound, 0.16, places=12)
        assert_allclose(solution.recovery_matrix, [[1.0]], atol=1e-12)

    def test_kernel_free_quantity_uses_mean_limit(self):
        bundle = build_laplacian(path_graph(4))
        q = QuantityOfInterest.matrix(bundle.sqrt_laplacian)
        solution = solve_global(bundle, [0, 2], q, ModelParams(0.5, 1.0))
        self.assertEqual(solution.regime, 'tau_zero')
        self.assertEqual(solution.tau_flat, 0.0)
        self.assertAlmostEqual(solution.gwce_sq_bound, 0.25, places=9)
        assert_allclose(solution.recovery_matrix, 0.0, atol=1e-9)

    def test_infeasible_below_cap(self):
        with self.assertRaises(InfeasibleProgramError):
            solve_global(
                k2_bundle(), [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0), feasibility_cap=1e-6
            )

    def test_unobserved_component(self):
        graph = Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
        with self.assertRaises(UnobservedComponentError):
            solve_global(build_laplacian(graph), [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0))

    def test_verification_grid_brackets_optimum(self):
        ctx = FeasibilityContext.build(k2_bundle(), [0], QuantityOfInterest.unlabeled())
        value, c, d = verify_on_grid(ctx, ModelParams(1.0, 1.0), 2.0, 2.0, 200)
        self.assertGreaterEqual(value, 4.0 - 1e-9)
        self.assertLess(value, 4.0 * 1.03)

    def test_wide_grid_brackets_optimum(self):
        bundle = build_laplacian(path_graph(6))
        q = QuantityOfInterest.unlabeled()
        params = ModelParams(0.5, 1.0)
        exact = solve_global(bundle, [0, 5], q, params).gwce_sq_bound
        ctx = FeasibilityContext.build(bundle, [0, 5], q)
        value, c, d = wide_grid_optimum(ctx, params, 40, 6.0)
        self.assertGreaterEqual(value, exact * (1 - 1e-6))
        self.assertLessEqual(value, 2.0 * exact * (1 + 1e-9))
        self.assertTrue(is_feasible(ctx, c, d))

    def test_wide_grid_recovers_from_a_wrong_basin(self):
        bundle = build_laplacian(path_graph(6))
        q = QuantityOfInterest.unlabeled()
        params = ModelParams(0.5, 1.0)
        exact = solve_global(bundle, [0, 5], q, params)
        self.assertEqual(exact.regime, 'interior')
        self.assertTrue(exact.verified)

        wrong = SearchResult(t=0.999, value=0.0, refined=False)
        with mock.patch('param_select.global_select.minimize_on_unit_interval', return_value=wrong):
            with self.assertLogs('param_select.global_select', level='WARNING') as logs:
                patched = solve_global(bundle, [0, 5], q, params)
        self.assertEqual(patched.regime, 'grid')
        self.assertFalse(patched.verified)
        self.assertTrue(any('PARAMSEL-GLOBAL06' in line for line in logs.output))
        self.assertGreaterEqual(patched.gwce_sq_bound, exact.gwce_sq_bound * (1 - 1e-6))
        self.assertLessEqual(patched.gwce_sq_bound, exact.gwce_sq_bound * 1.05)


class SolveLocalTest(SimpleTestCase):

    def setUp(self):
        self.bundle = build_laplacian(path_graph(3))
        self.obs = Observation([0, 2], [0.0, 1.0])

    def test_path_closed_form(self):
        # f_tau = (a, 1/2, 1 - a) with a = (1 - tau)/2
        solution = solve_local(self.bundle, self.obs, ModelParams(2.0, 1.0))
        self.assertAlmostEqual(solution.tau_natural, 2.0 / 3.0, places=9)
        self.assertAlmostEqual(solution.minimax_value, 2.0 / 9.0, places=9)
        assert_allclose(solution.f_hat, [1.0 / 6.0, 0.5, 5.0 / 6.0], atol=1e-9)
        self.assertFalse(solution.degenerate)

    def test_equal_budgets(self):
        solution = solve_local(self.bundle, self.obs, ModelParams(1.0, 1.0))
        self.assertAlmostEqual(solution.tau_natural, 0.5, places=9)
        self.assertAlmostEqual(solution.minimax_value, 0.125, places=9)
        self.assertLessEqual(solution.balance_residual, 1e-8 * 2.0)

    def test_balance_function_changes_sign(self):
        params = ModelParams(1.0, 1.0)
        self.assertLess(balance_function(self.bundle, self.obs, params, 0.0), 0.0)
        self.assertGreater(balance_function(self.bundle, self.obs, params, 1.0), 0.0)

    def test_minimax_objective_is_smallest_at_balance(self):
        params = ModelParams(2.0, 1.0)
        solution = solve_local(self.bundle, self.obs, params)
        for tau in (0.3, 0.6, 0.7, 0.9):
            a = (1.0 - tau) / 2.0
            f = np.array([a, 0.5, 1.0 - a])
            self.assertGreaterEqual(minimax_objective(self.bundle, self.obs, params, f), solution.minimax_value - 1e-12)

    def test_zero_observations(self):
        solution = solve_local(self.bundle, Observation([0, 2], [0.0, 0.0]), ModelParams(1.0, 1.0))
        self.assertTrue(solution.degenerate)
        self.assertEqual(solution.tau_natural, 0.5)
        assert_allclose(solution.f_hat, 0.0)

    def test_constant_labels_are_degenerate(self):
        # K2 labeled at one vertex: a constant interpolates y, so g vanishes identically
        solution = solve_local(k2_bundle(), Observation([0], [1.0]), ModelParams(1.0, 1.0))
        self.assertTrue(solution.degenerate)
        self.assertEqual(solution.tau_natural, 0.5)
        assert_allclose(solution.f_hat, [1.0, 1.0])
        self.assertAlmostEqual(solution.minimax_value, 0.0)
        self.assertAlmostEqual(solution.balance_residual, 0.0)


class GwceTest(SimpleTestCase):

    def test_optimal_map_attains_program_value(self):
        bundle = k2_bundle()
        params = ModelParams(1.0, 1.0)
        solution = solve_global(bundle, [0], QuantityOfInterest.unlabeled(), params)
        value = evaluate_gwce_linear(solution.recovery_matrix, bundle, [0], QuantityOfInterest.unlabeled(), params)
        self.assertAlmostEqual(value, 2.0, delta=1e-6)

    def test_harmonic_midpoint(self):
        # B = (-1/2, 1, -1/2): ||B W|| = ||M|| = 1/sqrt(2)
        bundle = build_laplacian(path_graph(3))
        params = ModelParams(1.0, 2.0)
        expected = 3.0 / np.sqrt(2.0)
        args = (np.array([[0.5, 0.5]]), bundle, [0, 2], QuantityOfInterest.vertex(1), params)
        self.assertAlmostEqual(evaluate_gwce_linear(*args), expected, places=7)
        self.assertAlmostEqual(gwce_split_bound(*args), expected, places=9)

    def test_map_not_exact_on_constants_is_infinite(self):
        bundle = k2_bundle()
        value = evaluate_gwce_linear(
            np.zeros((1, 1)), bundle, [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0)
        )
        self.assertEqual(value, float('inf'))
        split = gwce_split_bound(np.zeros((1, 1)), bundle, [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0))
        self.assertEqual(split, float('inf'))

    def test_zero_map_for_zero_quantity(self):
        bundle = build_laplacian(path_graph(3))
        q = QuantityOfInterest.matrix(np.zeros((1, 3)))
        self.assertEqual(evaluate_gwce_linear(np.zeros((1, 2)), bundle, [0, 2], q, ModelParams(1.0, 1.0)), 0.0)

    def test_noise_only_error(self):
        bundle = build_laplacian(path_graph(3))
        value = evaluate_gwce_linear(
            np.array([[1.0]]), bundle, [1], QuantityOfInterest.vertex(1), ModelParams(5.0, 0.3)
        )
        self.assertAlmostEqual(value, 0.3, places=12)

    def test_split_bound_dominates(self):
        rng = np.random.default_rng(3)
        bundle = build_laplacian(complete_graph(5))
        labeled = [0, 2]
        params = ModelParams(1.0, 1.5)
        for _ in range(10):
            # rows of M sum to one, so B vanishes on constants
            m = rng.random((3, 2))
            m /= m.sum(axis=1, keepdims=True)
            tight = evaluate_gwce_linear(m, bundle, labeled, QuantityOfInterest.unlabeled(), params)
            split = gwce_split_bound(m, bundle, labeled, QuantityOfInterest.unlabeled(), params)
            self.assertLessEqual(tight, split + 1e-9)

    def test_dimension_mismatch(self):
        with self.assertRaises(RecoveryError):
            evaluate_gwce_linear(
                np.zeros((2, 2)), k2_bundle(), [0], QuantityOfInterest.unlabeled(), ModelParams(1.0, 1.0)
            )


class EstimateFunctionalTest(SimpleTestCase):

    def test_midpoint_against_grid_oracle(self):
        bundle = build_laplacian(path_graph(3))
        params = ModelParams(1.0, 2.0)
        q = np.array([0.0, 1.0, 0.0])
        estimate = estimate_functional(q, bundle, [0, 2], params)

        # the kernel constraint leaves a = (alpha, 1 - alpha)
        pinv = np.linalg.pinv(bundle.laplacian)
        best = np.inf
        for alpha in np.linspace(-1.0, 2.0, 30001):
            a = np.array([alpha, 1.0 - alpha])
            residual = q - np.array([a[0], 0.0, a[1]])
            best = min(best, np.sqrt(residual @ pinv @ residual) + 2.0 * np.linalg.norm(a))
        self.assertLessEqual(estimate.gwce_value, best + 1e-8)
        self.assertGreater(estimate.gwce_value, best - 1e-6)
        self.assertAlmostEqual(estimate.gwce_value, 3.0 / np.sqrt(2.0), places=6)
        self.assertAlmostEqual(float(np.sum(estimate.weights)), 1.0, places=9)

    def test_full_observation_with_tiny_noise(self):
        bundle = build_laplacian(path_graph(4))
        q = np.array([0.1, 0.4, -0.3, 0.8])
        estimate = estimate_functional(q, bundle, [0, 1, 2, 3], ModelParams(1.0, 1e-8))
        assert_allclose(estimate.weights, q, atol=1e-6)

    def test_value_matches_generic_evaluator(self):
        bundle = build_laplacian(complete_graph(4))
        params = ModelParams(0.8, 1.2)
        q = np.array([0.2, 0.5, 0.1, 0.9])
        labeled = [0, 3]
        estimate = estimate_functional(q, bundle, labeled, params)
        quantity = QuantityOfInterest.matrix(q[None, :])
        generic = evaluate_gwce_linear(estimate.weights[None, :], bundle, labeled, quantity, params)
        self.assertAlmostEqual(estimate.gwce_value, generic, places=7)
        optimum = solve_global(bundle, labeled, quantity, params)
        self.assertLessEqual(estimate.gwce_value, optimum.gwce_bound + 1e-6)

    def test_dimension_mismatch(self):
        with self.assertRaises(RecoveryError):
            estimate_functional(np.ones(2), build_laplacian(path_graph(3)), [0], ModelParams(1.0, 1.0))


class HarmonicRegimeTest(SimpleTestCase):
    """The harmonic map is the tau = 1 member of the family used by the limits."""

    def test_recovery_matrix_reproduces_harmonic_interpolant(self):
        bundle = build_laplacian(path_graph(3))
        solution = solve_global(bundle, [1], QuantityOfInterest.vertex(1), ModelParams(1.0, 0.4))
        obs = Observation([1], [0.75])
        assert_allclose(solution.recovery_matrix @ obs.values, harmonic_interpolate(bundle, obs)[[1]])
