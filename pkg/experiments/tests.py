"""
Tests for the experiment harness, its random streams and the audit model.
"""

from unittest import mock

import numpy as np
import pytest
from django.test import SimpleTestCase, TestCase
from numpy.testing import assert_allclose, assert_array_equal

from graph_core import Graph, build_laplacian
from graph_core.generators import complete_graph, path_graph, random_graph, star_graph
from io_formats import ConfigValidationError, validate_config, write_results_csv
from recovery import Observation, QuantityOfInterest

from .harness import grid_search_best, prediction_error, run_label_growth, run_trial, tau_grid
from .models import ExperimentRun
from .noise import NoiseModelError, gen_noise
from .synthesis import make_rng, synth_raw_signal, synth_signal, trial_seed


def make_config(**overrides):
    data = {
        'dataset_path': 'unused.mtx',
        'eta': 0.5,
        'seed': 7,
        'n_labeled_grid': [3, 6],
        'tau_grid_size': 20,
        'num_trials': 2,
    }
    data.update(overrides)
    return validate_config(data)


class SynthSignalTest(SimpleTestCase):

    def test_energy_matches_rank(self):
        # E ||L^{1/2} f||^2 = sum over positive eigenvalues of lambda_k / lambda_k = N - K
        graphs = [
            Graph.from_edges(10, [(i, i + 1, 1.0) for i in range(4)] + [(i, i + 1, 0.5) for i in range(5, 9)]),
            complete_graph(6),
            star_graph(5),
            random_graph(np.random.default_rng(1), 12, edge_probability=0.3, weighted=True, connected=True),
        ]
        rng = make_rng(5)
        for graph in graphs:
            bundle = build_laplacian(graph)
            rank = graph.num_vertices - bundle.num_components
            energies = [bundle.energy_norm(synth_raw_signal(bundle, rng)) ** 2 for _ in range(2000)]
            self.assertLess(abs(np.mean(energies) - rank), 0.05 * rank, msg=f'N={graph.num_vertices}')

    def test_no_kernel_component(self):
        bundle = build_laplacian(Graph.from_edges(6, [(0, 1, 1.0), (1, 2, 2.0), (3, 4, 1.0), (4, 5, 1.0)]))
        raw = synth_raw_signal(bundle, 3)
        assert_allclose(bundle.kernel_basis.T @ raw, 0.0, atol=1e-12)

    def test_seeded_and_normalized(self):
        bundle = build_laplacian(complete_graph(3))
        first = synth_signal(bundle, 42)
        second = synth_signal(bundle, 42)
        self.assertEqual(first.tobytes(), second.tobytes())
        self.assertEqual(first.min(), 0.0)
        self.assertEqual(first.max(), 1.0)

    def test_constant_draw_gives_zeros(self):
        bundle = build_laplacian(Graph.from_edges(3, []))
        with self.assertLogs('experiments.synthesis', level='WARNING'):
            signal = synth_signal(bundle, 1)
        assert_array_equal(signal, 0.0)

    def test_trial_seed(self):
        self.assertEqual(trial_seed(7, 0), 7)
        self.assertEqual(trial_seed(7, 3), 4)
        self.assertEqual(trial_seed(2 ** 64 - 1, 1), 2 ** 64 - 2)


class GenNoiseTest(SimpleTestCase):

    def test_norm_is_eta(self):
        degrees = build_laplacian(random_graph(np.random.default_rng(3), 12)).degree
        labeled = [0, 3, 5, 7, 11]
        for model in ('uniform_centered', 'degree_proportional', 'inverse_degree_proportional'):
            with self.subTest(model=model):
                noise = gen_noise(model, 2.0, 9, labeled, degrees)
                self.assertEqual(noise.shape, (5,))
                self.assertLess(abs(np.linalg.norm(noise) - 2.0), 1e-12)

    def test_uniform_noise_is_centered(self):
        noise = gen_noise('uniform_centered', 1.5, 11, list(range(8)), np.ones(8))
        self.assertLess(abs(noise.mean()), 1e-12)

    def test_degree_proportional_on_star(self):
        degrees = build_laplacian(star_graph(4)).degree
        noise = gen_noise('degree_proportional', 1.0, 0, [0, 2], degrees)
        self.assertAlmostEqual(noise[0] / noise[1], 4.0, places=12)
        inverse = gen_noise('inverse_degree_proportional', 1.0, 0, [0, 2], degrees)
        self.assertAlmostEqual(inverse[0] / inverse[1], 0.25, places=12)

    def test_single_label_falls_back_to_zero(self):
        with self.assertLogs('experiments.noise', level='WARNING') as logs:
            noise = gen_noise('uniform_centered', 1.0, 0, [2], np.ones(3))
        assert_array_equal(noise, [0.0])
        self.assertIn('NOISE-GEN02', logs.output[0])

    def test_isolated_vertex_gets_zero_weight(self):
        with self.assertLogs('experiments.noise', level='WARNING'):
            noise = gen_noise('inverse_degree_proportional', 1.0, 0, [0, 1], np.array([0.0, 2.0]))
        assert_allclose(noise, [0.0, 1.0])

    def test_invalid_input(self):
        with self.assertRaises(NoiseModelError):
            gen_noise('laplace', 1.0, 0, [0], np.ones(1))
        with self.assertRaises(NoiseModelError):
            gen_noise('uniform_centered', 0.0, 0, [0], np.ones(1))


class GridSearchTest(SimpleTestCase):

    def setUp(self):
        self.bundle = build_laplacian(path_graph(6))
        self.obs = Observation([0, 5, 2], [0.0, 1.0, 0.6])
        self.q = QuantityOfInterest.unlabeled()
        self.truth = np.array([0.3, 0.8, 0.9])

    def test_single_candidate(self):
        tau, error = grid_search_best(self.bundle, self.obs, self.q, self.truth, [0.4])
        self.assertEqual(tau, 0.4)
        matrix = self.q.materialize(6, self.obs.labeled)
        self.assertEqual(error, prediction_error(self.bundle, self.obs, matrix, self.truth, 0.4))

    def test_refined_grid_never_worse(self):
        _, coarse = grid_search_best(self.bundle, self.obs, self.q, self.truth, tau_grid(20))
        _, fine = grid_search_best(self.bundle, self.obs, self.q, self.truth, tau_grid(200))
        self.assertLessEqual(fine, coarse)

    def test_ties_go_to_smaller_tau(self):
        # every vertex labeled: nothing to predict, every tau has error 0
        obs = Observation(list(range(6)), np.linspace(0.0, 1.0, 6))
        tau, error = grid_search_best(self.bundle, obs, self.q, np.zeros(0), [0.9, 0.2, 0.6])
        self.assertEqual((tau, error), (0.2, 0.0))

    def test_tau_grid_is_nested(self):
        coarse = set(tau_grid(20).tolist())
        self.assertTrue(coarse <= set(tau_grid(200).tolist()))
        assert_array_equal(tau_grid(1), [1.0])


class RunTrialTest(SimpleTestCase):

    def setUp(self):
        self.bundle = build_laplacian(random_graph(np.random.default_rng(12), 10, edge_probability=0.3))

    def test_rows_per_label_count(self):
        outcome = run_trial(make_config(), self.bundle, 0)
        self.assertEqual(len(outcome.rows), 8)
        self.assertEqual(
            sorted({row.method for row in outcome.rows}),
            ['global_opt', 'grid_search', 'harmonic', 'local_opt'],
        )
        self.assertTrue(all(row.seed == 7 for row in outcome.rows))
        self.assertTrue(all(row.runtime_ms == 0.0 for row in outcome.rows))
        harmonic = [row for row in outcome.rows if row.method == 'harmonic']
        self.assertTrue(all(row.tau == 1.0 for row in harmonic))

    def test_grid_search_never_worse(self):
        config = make_config(n_labeled_grid=[2, 4, 6, 8], overestimation_factor=2.0)
        for trial_index in range(3):
            groups = {}
            for row in run_trial(config, self.bundle, trial_index).rows:
                groups.setdefault(row.n_labeled, {})[row.method] = row.prediction_error
            for errors in groups.values():
                best = errors.pop('grid_search')
                for error in errors.values():
                    self.assertLessEqual(best, error)

    def test_deterministic(self):
        config = make_config()
        first = run_trial(config, self.bundle, 1)
        second = run_trial(config, self.bundle, 1)
        self.assertEqual(write_results_csv(first.rows), write_results_csv(second.rows))
        self.assertEqual(first.rows[0].seed, 7 ^ 1)

    def test_overestimation_rows(self):
        outcome = run_trial(make_config(overestimation_factor=2.0, methods=['global_opt', 'local_opt']), self.bundle, 0)
        self.assertEqual(
            sorted({row.method for row in outcome.rows}),
            ['global_opt', 'global_opt_over', 'local_opt', 'local_opt_over'],
        )
        plain = {row.n_labeled: row for row in outcome.rows if row.method == 'global_opt'}
        over = {row.n_labeled: row for row in outcome.rows if row.method == 'global_opt_over'}
        for n_labeled, row in over.items():
            self.assertGreaterEqual(row.certified_bound, plain[n_labeled].certified_bound * (1.0 - 1e-6))

    def test_overestimated_bound_at_most_factor_squared(self):
        factor = 2.0
        for target in ('eta', 'both'):
            config = make_config(
                overestimation_factor=factor, overestimation_target=target, methods=['global_opt'],
                num_trials=3,
            )
            for trial_index in range(config.num_trials):
                outcome = run_trial(config, self.bundle, trial_index)
                plain = {row.n_labeled: row.certified_bound for row in outcome.rows if row.method == 'global_opt'}
                over = {row.n_labeled: row.certified_bound for row in outcome.rows if row.method == 'global_opt_over'}
                self.assertEqual(set(over), set(plain))
                for n_labeled, bound in over.items():
                    with self.subTest(target=target, trial=trial_index, n_labeled=n_labeled):
                        self.assertLessEqual(bound ** 2, factor ** 2 * plain[n_labeled] ** 2 * (1.0 + 1e-9) + 1e-8)

    def test_unobserved_steps_skipped(self):
        bundle = build_laplacian(Graph.from_edges(6, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)]))
        with self.assertLogs('experiments.harness', level='WARNING'):
            outcome = run_trial(make_config(n_labeled_grid=[1, 6]), bundle, 0)
        self.assertEqual(outcome.skipped, [1])
        self.assertEqual({row.n_labeled for row in outcome.rows}, {6})

    def test_certify_local_fills_bound(self):
        config = make_config(methods=['local_opt'], certify_local=True, eps_rule='linear_2x')
        outcome = run_trial(config, self.bundle, 0)
        for row in outcome.rows:
            self.assertIsNotNone(row.certified_bound)
            # truth satisfies both budgets under linear_2x, so the bound covers the error
            self.assertLessEqual(row.prediction_error, row.certified_bound + 1e-6)

    def test_record_runtime(self):
        outcome = run_trial(make_config(record_runtime=True, methods=['global_opt']), self.bundle, 0)
        self.assertTrue(all(row.runtime_ms > 0.0 for row in outcome.rows))


class CertificateTest(SimpleTestCase):
    """The global map's error never exceeds its certified bound on consistent trials."""

    def test_no_violations(self):
        rng = np.random.default_rng(13)
        consistent = 0
        for graph_index in range(3):
            bundle = build_laplacian(random_graph(rng, 12, edge_probability=0.25))
            for noise_model in ('uniform_centered', 'degree_proportional', 'inverse_degree_proportional'):
                config = make_config(
                    eps_rule='linear_2x', noise_model=noise_model, methods=['global_opt'],
                    n_labeled_grid=[2, 5, 8, 11], seed=graph_index,
                )
                outcome = run_trial(config, bundle, 0)
                self.assertEqual(outcome.violations, [])
                consistent += sum(check.model_consistent for check in outcome.checks)
        self.assertGreater(consistent, 0)


class RunLabelGrowthTest(SimpleTestCase):

    def test_sorted_and_parallel_identical(self):
        graph = random_graph(np.random.default_rng(14), 9, edge_probability=0.3)
        config = make_config(num_trials=3, methods=['local_opt', 'harmonic', 'grid_search'])
        sequential = run_label_growth(config, graph)
        parallel = run_label_growth(config, graph, jobs=2)
        keys = [row.sort_key for row in sequential.rows]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(sequential.rows), 3 * 2 * 3)
        self.assertEqual(write_results_csv(sequential.rows), write_results_csv(parallel.rows))

    def test_label_count_above_vertex_count(self):
        with self.assertRaises(ConfigValidationError):
            run_label_growth(make_config(n_labeled_grid=[3, 20]), path_graph(5))


@pytest.mark.slow
class ProtocolShapeTest(SimpleTestCase):
    """Full label grid on a 112-vertex random graph: 11 rows per method and trial."""

    def test_row_count(self):
        graph = random_graph(np.random.default_rng(15), 112, edge_probability=0.07)
        config = make_config(eta=2.0, n_labeled_grid=list(range(5, 56, 5)), num_trials=1, tau_grid_size=200)
        outcome = run_label_growth(config, graph)
        self.assertEqual(len(outcome.rows), 11 * 4)
        self.assertEqual(outcome.violations, [])


class ExperimentRunTest(TestCase):

    def test_log_run(self):
        run = ExperimentRun.log_run('dolphins', config={'eta': 2.0}, num_rows=44, num_trials=1)
        self.assertIsNotNone(run)
        self.assertEqual(ExperimentRun.objects.count(), 1)
        self.assertTrue(run.success)
        self.assertIn('dolphins', str(run))

    def test_audit_failure_is_swallowed(self):
        with mock.patch.object(ExperimentRun.objects, 'create', side_effect=RuntimeError('db down')):
            with self.assertLogs('experiments.models', level='ERROR'):
                self.assertIsNone(ExperimentRun.log_run('dolphins'))
