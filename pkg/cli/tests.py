"""
Tests for the graphrecover command line.
"""

import io
import json
import shutil
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, TestCase, override_settings

from experiments.models import ExperimentRun
from graph_core import build_laplacian
from graph_core.generators import path_graph
from io_formats import format_float, parse_results_csv, read_labels_csv
from recovery import Observation, QuantityOfInterest, regularize

from .entry import main

K2 = '%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n'
PATH5 = '%%MatrixMarket matrix coordinate real symmetric\n5 5 4\n2 1 1\n3 2 1\n4 3 1\n5 4 1\n'
TWO_EDGES = '%%MatrixMarket matrix coordinate pattern symmetric\n4 4 2\n2 1\n4 3\n'


class CliTestMixin:

    def setUp(self):
        super().setUp()
        self.directory = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.directory)

    def write(self, name: str, text: str) -> str:
        path = self.directory / name
        path.write_text(text)
        return str(path)

    def run_cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = main([str(arg) for arg in argv], stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def values(self, stdout: str) -> dict:
        pairs = [line.split('=', 1) for line in stdout.splitlines() if '=' in line]
        return {key: value for key, value in pairs}


class DispatchTest(CliTestMixin, SimpleTestCase):

    def test_no_subcommand(self):
        code, _, stderr = self.run_cli()
        self.assertEqual(code, 1)
        self.assertIn('usage: graphrecover', stderr)

    def test_unknown_subcommand(self):
        code, _, stderr = self.run_cli('plot')
        self.assertEqual(code, 1)
        self.assertIn('unknown subcommand', stderr)

    def test_unknown_flag_prints_usage(self):
        graph = self.write('k2.mtx', K2)
        code, _, stderr = self.run_cli('synth', '--graph', graph, '--seed', 1, '--colour', 'red')
        self.assertEqual(code, 1)
        self.assertIn('--colour', stderr)
        self.assertIn('usage:', stderr)

    def test_missing_eta_names_the_flag(self):
        graph = self.write('k2.mtx', K2)
        labels = self.write('labels.csv', 'vertex_index,value\n0,1\n')
        code, stdout, stderr = self.run_cli('select-global', '--graph', graph, '--labels', labels, '--eps', 1)
        self.assertEqual(code, 1)
        self.assertEqual(stdout, '')
        self.assertIn('--eta', stderr)


class RecoverTest(CliTestMixin, SimpleTestCase):

    def test_matches_library_call(self):
        graph = self.write('path.mtx', PATH5)
        labels = self.write('labels.csv', 'vertex_index,value\n0,0.0\n4,1.0\n2,0.3\n')
        code, stdout, _ = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 0.5)
        self.assertEqual(code, 0)

        bundle = build_laplacian(path_graph(5))
        obs = Observation([0, 4, 2], [0.0, 1.0, 0.3])
        expected = QuantityOfInterest.unlabeled().materialize(5, obs.labeled) @ regularize(bundle, obs, 0.5)
        lines = stdout.splitlines()
        self.assertEqual(lines[0], 'index,value')
        self.assertEqual(lines[1:], [f'{i},{format_float(v)}' for i, v in enumerate(expected)])

    def test_repeated_runs_identical(self):
        graph = self.write('path.mtx', PATH5)
        labels = self.write('labels.csv', 'vertex_index,value\n0,0.0\n4,1.0\n')
        first = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 0.3, '--qoi', 'full')
        second = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 0.3, '--qoi', 'full')
        self.assertEqual(first, second)
        self.assertEqual(len(first[1].splitlines()), 6)

    def test_tau_out_of_range(self):
        graph = self.write('path.mtx', PATH5)
        labels = self.write('labels.csv', 'vertex_index,value\n0,0.0\n')
        code, _, _ = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 1.5)
        self.assertEqual(code, 1)

    def test_unobserved_component(self):
        graph = self.write('two.mtx', TWO_EDGES)
        labels = self.write('labels.csv', 'vertex_index,value\n0,1.0\n')
        code, _, stderr = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 0.5)
        self.assertEqual(code, 1)
        self.assertIn('unobserved', stderr)

    def test_malformed_graph(self):
        graph = self.write('bad.mtx', K2.replace('2 1\n', '3 1\n'))
        labels = self.write('labels.csv', 'vertex_index,value\n0,1.0\n')
        code, _, stderr = self.run_cli('recover', '--graph', graph, '--labels', labels, '--tau', 0.5)
        self.assertEqual(code, 1)
        self.assertIn('index out of bounds at line 3', stderr)


class SelectGlobalTest(CliTestMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        self.graph = self.write('k2.mtx', K2)
        self.labels = self.write('labels.csv', 'vertex_index,value\n0,1\n')

    def test_k2_toy(self):
        code, stdout, _ = self.run_cli(
            'select-global', '--graph', self.graph, '--labels', self.labels, '--eps', 1, '--eta', 1,
        )
        self.assertEqual(code, 0)
        values = self.values(stdout)
        self.assertAlmostEqual(float(values['tau']), 0.5, places=6)
        self.assertAlmostEqual(float(values['gwce_sq_bound']), 4.0, places=6)
        self.assertEqual(list(values), ['c', 'd', 'tau', 'gwce_sq_bound', 'gwce_bound', 'regime'])

    @override_settings(GLOBAL_FEASIBILITY_CAP=1e-6)
    def test_infeasible_exit_code(self):
        code, stdout, stderr = self.run_cli(
            'select-global', '--graph', self.graph, '--labels', self.labels, '--eps', 1, '--eta', 1,
        )
        self.assertEqual(code, 2)
        self.assertEqual(stdout, '')
        self.assertIn('infeasible', stderr)

    def test_functional(self):
        code, stdout, _ = self.run_cli(
            'select-global', '--graph', self.graph, '--labels', self.labels,
            '--eps', 1, '--eta', 1, '--qoi', 'vertex:1', '--functional',
        )
        self.assertEqual(code, 0)
        values = self.values(stdout)
        self.assertAlmostEqual(float(values['gwce_bound']), 2.0, places=5)
        self.assertAlmostEqual(float(values['estimate']), 1.0, places=5)

    def test_functional_needs_one_row(self):
        code, _, _ = self.run_cli(
            'select-global', '--graph', self.graph, '--labels', self.labels,
            '--eps', 1, '--eta', 1, '--qoi', 'full', '--functional',
        )
        self.assertEqual(code, 1)

    def test_bad_qoi(self):
        code, _, _ = self.run_cli(
            'select-global', '--graph', self.graph, '--labels', self.labels,
            '--eps', 1, '--eta', 1, '--qoi', 'vertex:x',
        )
        self.assertEqual(code, 1)


class SelectLocalTest(CliTestMixin, SimpleTestCase):

    def test_path_example(self):
        # labels 0 and 1 at the ends of a 3-path, eps = 2 eta: tau = 2/3, estimate 1/2 in the middle
        graph = self.write('p3.mtx', '%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n')
        labels = self.write('labels.csv', 'vertex_index,value\n0,0\n2,1\n')
        code, stdout, _ = self.run_cli(
            'select-local', '--graph', graph, '--labels', labels, '--eps', 2, '--eta', 1,
        )
        self.assertEqual(code, 0)
        head, csv_text = stdout.split('\n\n', 1)
        values = self.values(head)
        self.assertAlmostEqual(float(values['tau']), 2.0 / 3.0, places=6)
        self.assertAlmostEqual(float(values['minimax_value']), 2.0 / 9.0, places=6)
        self.assertEqual(values['degenerate'], 'false')
        self.assertEqual(csv_text.splitlines()[0], 'index,value')
        self.assertAlmostEqual(float(csv_text.splitlines()[1].split(',')[1]), 0.5, places=8)


class LwceCurveCommandTest(CliTestMixin, SimpleTestCase):

    def test_curve_rows(self):
        graph = self.write('path.mtx', PATH5)
        labels = self.write('labels.csv', 'vertex_index,value\n0,0.1\n4,0.9\n')
        out = self.directory / 'curve.csv'
        code, stdout, _ = self.run_cli(
            'lwce-curve', '--graph', graph, '--labels', labels, '--eps', 1, '--eta', 0.5,
            '--tau-grid', 4, '--out', out,
        )
        self.assertEqual(code, 0)
        self.assertEqual(stdout, '')
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], 'tau,gamma,c,d')
        self.assertEqual([float(line.split(',')[0]) for line in lines[1:]], [0.2, 0.4, 0.6, 0.8])


class SynthCommandTest(CliTestMixin, SimpleTestCase):

    def test_signal_is_seeded(self):
        graph = self.write('path.mtx', PATH5)
        first = self.run_cli('synth', '--graph', graph, '--seed', 42)
        second = self.run_cli('synth', '--graph', graph, '--seed', 42)
        self.assertEqual(first, second)
        obs = read_labels_csv(first[1].encode())
        self.assertEqual(obs.num_labeled, 5)
        self.assertEqual((obs.values.min(), obs.values.max()), (0.0, 1.0))

    def test_negative_seed(self):
        graph = self.write('path.mtx', PATH5)
        code, _, _ = self.run_cli('synth', '--graph', graph, '--seed', -1)
        self.assertEqual(code, 1)


class ExperimentCommandTest(CliTestMixin, TestCase):

    def config(self, **overrides):
        data = {
            'dataset_path': self.write('path.mtx', PATH5),
            'eta': 0.5,
            'seed': 3,
            'n_labeled_grid': [2, 4],
            'tau_grid_size': 10,
            'num_trials': 2,
        }
        data.update(overrides)
        return self.write('config.json', json.dumps(data))

    def test_writes_results_and_audit_row(self):
        config = self.config()
        out = self.directory / 'results.csv'
        code, stdout, _ = self.run_cli('experiment', '--config', config, '--out', out)
        self.assertEqual(code, 0)
        self.assertIn('Wrote 16 rows', stdout)
        rows = parse_results_csv(out.read_bytes())
        self.assertEqual(len(rows), 2 * 2 * 4)
        run = ExperimentRun.objects.get()
        self.assertTrue(run.success)
        self.assertEqual(run.num_rows, 16)

    def test_output_is_reproducible(self):
        config = self.config()
        first = self.run_cli('experiment', '--config', config)
        second = self.run_cli('experiment', '--config', config, '--jobs', 2)
        self.assertEqual(first[0], 0)
        self.assertEqual(first[1], second[1])
        self.assertTrue(first[1].startswith('n_labeled,method,trial,seed,tau'))

    def test_invalid_config(self):
        config = self.config(eta=-1)
        code, _, stderr = self.run_cli('experiment', '--config', config)
        self.assertEqual(code, 1)
        self.assertIn('eta must be positive', stderr)
        self.assertFalse(ExperimentRun.objects.get().success)

    def test_grid_larger_than_graph(self):
        config = self.config(n_labeled_grid=[2, 9])
        code, _, _ = self.run_cli('experiment', '--config', config)
        self.assertEqual(code, 1)
        np.testing.assert_equal(ExperimentRun.objects.filter(success=False).count(), 1)
