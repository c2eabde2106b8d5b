"""
Tests for io_formats.
"""

import json
import tempfile
from unittest import mock

import numpy as np
import pytest
from django.conf import settings
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_array_equal

from graph_core import Graph
from lwce_bound import CurvePoint
from recovery import EpsRule

from .csv_formats import (
    CsvFormatError,
    ResultRow,
    parse_results_csv,
    read_labels_csv,
    write_curve_csv,
    write_estimate_csv,
    write_results_csv,
    write_signal_csv,
)
from .datasets import DATASET_CATALOG, DatasetError, load_graph, resolve_dataset_path
from .matrix_market import MatrixMarketParseError, parse_matrix_market
from .run_config import ConfigValidationError, read_config

TRIANGLE = '%%MatrixMarket matrix coordinate pattern symmetric\n3 3 3\n2 1\n3 1\n3 2\n'


class ParseMatrixMarketTest(SimpleTestCase):

    def test_pattern_triangle(self):
        graph = parse_matrix_market(TRIANGLE.encode())
        self.assertEqual(graph.edges, ((0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)))

    def test_index_out_of_bounds(self):
        text = TRIANGLE.replace('3 2\n', '4 1\n')
        with self.assertRaises(MatrixMarketParseError) as ctx:
            parse_matrix_market(text)
        self.assertEqual(str(ctx.exception), 'index out of bounds at line 5')
        self.assertEqual(ctx.exception.line, 5)

    def test_header_is_case_insensitive(self):
        graph = parse_matrix_market(TRIANGLE.replace('pattern symmetric', 'Pattern SYMMETRIC'))
        self.assertEqual(graph.num_edges, 3)

    def test_comments_and_blank_lines_skipped(self):
        text = (
            '%%MatrixMarket matrix coordinate real symmetric\n'
            '% a comment\n'
            '\n'
            '3 3 2\n'
            '% another\n'
            '2 1 0.5\n'
            '\n'
            '3 2 2.0\n'
        )
        graph = parse_matrix_market(text)
        self.assertEqual(graph.edges, ((0, 1, 0.5), (1, 2, 2.0)))

    def test_integer_field(self):
        text = '%%MatrixMarket matrix coordinate integer symmetric\n2 2 1\n2 1 3\n'
        self.assertEqual(parse_matrix_market(text).edges, ((0, 1, 3.0),))

    def test_diagonal_dropped(self):
        text = '%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 5.0\n2 1 1.0\n'
        self.assertEqual(parse_matrix_market(text).edges, ((0, 1, 1.0),))

    def test_general_matrix_is_averaged_with_warning(self):
        text = '%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n2 1 3.0\n'
        with self.assertLogs('io_formats.matrix_market', level='WARNING') as logs:
            graph = parse_matrix_market(text)
        self.assertEqual(graph.edges, ((0, 1, 2.0),))
        self.assertIn('MTX-PARSE02', logs.output[0])

    def test_duplicate_entries_summed_with_warning(self):
        text = '%%MatrixMarket matrix coordinate pattern symmetric\n3 3 4\n2 1\n2 1\n3 1\n3 2\n'
        with self.assertLogs('io_formats.matrix_market', level='WARNING') as logs:
            graph = parse_matrix_market(text)
        self.assertEqual(graph.edges, ((0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0)))
        self.assertTrue(any('MTX-PARSE04' in line for line in logs.output))

    def test_mirrored_symmetric_entry_is_a_duplicate(self):
        text = '%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1.0\n1 2 0.5\n'
        with self.assertLogs('io_formats.matrix_market', level='WARNING') as logs:
            graph = parse_matrix_market(text)
        self.assertEqual(graph.edges, ((0, 1, 1.5),))
        self.assertIn('1 duplicate', logs.output[0])

    def test_general_mirror_pair_is_not_a_duplicate(self):
        text = '%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.5\n2 1 1.5\n'
        with mock.patch('io_formats.matrix_market.logger') as log:
            parse_matrix_market(text)
        log.warning.assert_not_called()

    def test_symmetric_general_matrix(self):
        text = '%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.5\n2 1 1.5\n'
        graph = parse_matrix_market(text)
        self.assertEqual(graph.edges, ((0, 1, 1.5),))

    def test_malformed_header(self):
        for header in (
            '%%MatrixMarket matrix array real general',
            '%%MatrixMarket matrix coordinate complex symmetric',
            '%%MatrixMarket matrix coordinate real hermitian',
            '%MatrixMarket matrix coordinate real general',
            '',
        ):
            with self.subTest(header=header):
                with self.assertRaises(MatrixMarketParseError) as ctx:
                    parse_matrix_market(f'{header}\n2 2 1\n2 1 1.0\n')
                self.assertEqual(ctx.exception.line, 1)

    def test_negative_weight(self):
        text = '%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 -1.0\n'
        with self.assertRaises(MatrixMarketParseError) as ctx:
            parse_matrix_market(text)
        self.assertEqual(str(ctx.exception), 'negative weight at line 3')

    def test_nnz_mismatch(self):
        with self.assertRaises(MatrixMarketParseError) as ctx:
            parse_matrix_market(TRIANGLE.replace('3 3 3', '3 3 4'))
        self.assertIn('declared 4 entries but found 3', str(ctx.exception))
        with self.assertRaises(MatrixMarketParseError) as ctx:
            parse_matrix_market(TRIANGLE.replace('3 3 3', '3 3 2'))
        self.assertEqual(ctx.exception.line, 5)

    def test_non_square(self):
        with self.assertRaises(MatrixMarketParseError) as ctx:
            parse_matrix_market(TRIANGLE.replace('3 3 3', '3 4 3'))
        self.assertEqual(ctx.exception.line, 2)

    def test_missing_size_line(self):
        with self.assertRaises(MatrixMarketParseError):
            parse_matrix_market('%%MatrixMarket matrix coordinate pattern symmetric\n% only comments\n')

    def test_fuzzed_inputs_fail_with_parse_errors_only(self):
        rng = np.random.default_rng(41)
        alphabet = list('0123456789 -.%e\n')
        source = TRIANGLE.replace('pattern', 'real').replace('2 1\n', '2 1 0.5\n').replace(
            '3 1\n', '3 1 1.5\n').replace('3 2\n', '3 2 2.5\n')
        for _ in range(500):
            chars = list(source)
            for _ in range(int(rng.integers(1, 4))):
                position = int(rng.integers(len(chars)))
                if rng.random() < 0.5:
                    chars[position] = alphabet[int(rng.integers(len(alphabet)))]
                else:
                    del chars[position]
            text = ''.join(chars)
            try:
                graph = parse_matrix_market(text)
            except MatrixMarketParseError:
                continue
            self.assertIsInstance(graph, Graph)


class DatasetTest(SimpleTestCase):

    def test_catalog_sizes(self):
        self.assertEqual(DATASET_CATALOG['adjnoun'].num_vertices, 112)
        self.assertEqual(DATASET_CATALOG['netscience'].num_edges, 914)
        self.assertTrue(DATASET_CATALOG['netscience'].largest_component_only)
        self.assertEqual(len(DATASET_CATALOG), 5)

    def test_catalog_name_resolves_in_dataset_dir(self):
        path = resolve_dataset_path('dolphins')
        self.assertEqual(path.name, 'dolphins.mtx')
        self.assertEqual(str(path.parent), str(settings.DATASET_DIR))

    def test_missing_file(self):
        with self.assertRaises(DatasetError):
            load_graph('/nonexistent/graph.mtx')

    def test_load_from_path(self):
        with tempfile.TemporaryDirectory() as directory:
            path = f'{directory}/triangle.mtx'
            with open(path, 'w') as handle:
                handle.write(TRIANGLE)
            self.assertEqual(load_graph(path).num_edges, 3)
            with override_settings(DATASET_DIR=directory):
                self.assertEqual(load_graph('triangle.mtx').num_edges, 3)


@pytest.mark.integration
class CatalogDatasetsTest(SimpleTestCase):
    """Parse every catalog dataset present in DATASET_DIR."""

    def test_catalog_datasets_parse_with_published_sizes(self):
        found = 0
        for name, info in DATASET_CATALOG.items():
            if not resolve_dataset_path(name).exists():
                continue
            found += 1
            graph = load_graph(name)
            self.assertEqual((graph.num_vertices, graph.num_edges), (info.num_vertices, info.num_edges))
        if not found:
            self.skipTest(f'no catalog datasets in {settings.DATASET_DIR}')


class ReadConfigTest(SimpleTestCase):

    def minimal(self, **overrides):
        data = {'dataset_path': 'adjnoun.mtx', 'eta': 2.0, 'seed': 7, 'n_labeled_grid': [5, 10]}
        data.update(overrides)
        return json.dumps(data)

    def assertRejected(self, text, key):
        with self.assertRaises(ConfigValidationError) as ctx:
            read_config(text)
        self.assertIn(key, ctx.exception.errors)
        return ctx.exception

    def test_defaults_filled(self):
        config = read_config(self.minimal())
        self.assertEqual(config.dataset_path, 'adjnoun.mtx')
        self.assertEqual(config.eta, 2.0)
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.n_labeled_grid, (5, 10))
        self.assertEqual(config.tau_grid_size, 200)
        self.assertEqual(config.overestimation_factor, 1.0)
        self.assertEqual(config.methods, ('global_opt', 'local_opt', 'grid_search', 'harmonic'))
        self.assertEqual(config.eps_rule, EpsRule('literal_squared'))
        self.assertEqual(config.noise_model, 'uniform_centered')
        self.assertEqual(config.num_trials, settings.EXPERIMENT_DEFAULT_TRIALS)
        self.assertFalse(config.certify_local)
        self.assertFalse(config.record_runtime)

    def test_negative_eta(self):
        error = self.assertRejected(self.minimal(eta=-1), 'eta')
        self.assertEqual(error.errors['eta'], ['eta must be positive'])

    def test_unknown_key(self):
        self.assertRejected(self.minimal(colour='blue'), 'colour')

    def test_type_mismatch_names_the_key(self):
        self.assertRejected(self.minimal(seed='7'), 'seed')
        self.assertRejected(self.minimal(eta='2.0'), 'eta')
        self.assertRejected(self.minimal(certify_local='yes'), 'certify_local')
        self.assertRejected(self.minimal(tau_grid_size=True), 'tau_grid_size')

    def test_seed_range(self):
        self.assertEqual(read_config(self.minimal(seed=2 ** 64 - 1)).seed, 2 ** 64 - 1)
        self.assertRejected(self.minimal(seed=2 ** 64), 'seed')
        self.assertRejected(self.minimal(seed=-1), 'seed')

    def test_grid_must_increase(self):
        self.assertRejected(self.minimal(n_labeled_grid=[10, 5]), 'n_labeled_grid')
        self.assertRejected(self.minimal(n_labeled_grid=[5, 5]), 'n_labeled_grid')
        self.assertRejected(self.minimal(n_labeled_grid=[0, 5]), 'n_labeled_grid')
        self.assertRejected(self.minimal(n_labeled_grid=[]), 'n_labeled_grid')

    def test_grid_bounded_by_graph_size(self):
        config = read_config(self.minimal(n_labeled_grid=[5, 120]))
        with self.assertRaises(ConfigValidationError):
            config.check_against(112)

    def test_overestimation_factor_at_least_one(self):
        self.assertRejected(self.minimal(overestimation_factor=0.5), 'overestimation_factor')
        self.assertEqual(read_config(self.minimal(overestimation_factor=2)).overestimation_factor, 2.0)

    def test_eps_rule_variants(self):
        self.assertEqual(read_config(self.minimal(eps_rule='linear_2x')).eps_rule, EpsRule('linear_2x'))
        self.assertEqual(
            read_config(self.minimal(eps_rule={'explicit': 3.5})).eps_rule, EpsRule('explicit', 3.5)
        )
        self.assertRejected(self.minimal(eps_rule='cubic'), 'eps_rule')
        self.assertRejected(self.minimal(eps_rule={'explicit': -1}), 'eps_rule')

    def test_methods_subset(self):
        config = read_config(self.minimal(methods=['harmonic', 'local_opt', 'harmonic']))
        self.assertEqual(config.methods, ('harmonic', 'local_opt'))
        self.assertRejected(self.minimal(methods=['oracle']), 'methods')

    def test_full_protocol_config(self):
        config = read_config(self.minimal(eta=2, n_labeled_grid=list(range(5, 57, 5))))
        config.check_against(112)
        self.assertEqual(config.n_labeled_grid[-1], 55)

    def test_invalid_json(self):
        self.assertRejected('{"eta": ', 'non_field_errors')
        self.assertRejected('[1, 2]', 'non_field_errors')

    def test_missing_required_key(self):
        self.assertRejected(json.dumps({'eta': 2.0, 'seed': 1, 'n_labeled_grid': [1]}), 'dataset_path')

    def test_to_dict_reads_back(self):
        config = read_config(self.minimal(eps_rule={'explicit': 1.5}, num_trials=3))
        self.assertEqual(read_config(json.dumps(config.to_dict())), config)


class ResultsCsvTest(SimpleTestCase):

    def test_empty_rows_give_header_only(self):
        self.assertEqual(
            write_results_csv([]),
            b'n_labeled,method,trial,seed,tau,prediction_error,certified_bound,runtime_ms\n',
        )

    def test_one_row(self):
        row = ResultRow(5, 'harmonic', 0, 7, 1.0, 0.25, None, 0.0)
        lines = write_results_csv([row]).decode().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[1], '5,harmonic,0,7,1,0.25,,0')
        self.assertFalse(lines[1].endswith(','))

    def test_rows_sorted(self):
        rows = [
            ResultRow(10, 'global_opt', 0, 1, 0.5, 1.0),
            ResultRow(5, 'local_opt', 1, 1, 0.5, 1.0),
            ResultRow(5, 'local_opt', 0, 1, 0.5, 1.0),
            ResultRow(5, 'harmonic', 2, 1, 1.0, 1.0),
        ]
        parsed = parse_results_csv(write_results_csv(rows))
        self.assertEqual(
            [(r.n_labeled, r.method, r.trial) for r in parsed],
            [(5, 'harmonic', 2), (5, 'local_opt', 0), (5, 'local_opt', 1), (10, 'global_opt', 0)],
        )

    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(42)
        rows = [
            ResultRow(
                n_labeled=5 * (k + 1),
                method=method,
                trial=k,
                seed=2 ** 64 - 1 - k,
                tau=float(rng.random()),
                prediction_error=float(rng.lognormal(0.0, 5.0)),
                certified_bound=float(np.pi * 10.0 ** rng.integers(-300, 300)) if k % 2 else None,
                runtime_ms=float(rng.random() * 1000),
            )
            for k in range(10)
            for method in ('global_opt', 'local_opt')
        ]
        parsed = parse_results_csv(write_results_csv(rows))
        self.assertEqual(parsed, sorted(rows, key=lambda row: row.sort_key))

    def test_wrong_header(self):
        with self.assertRaises(CsvFormatError) as ctx:
            parse_results_csv(b'n_labeled,method\n')
        self.assertEqual(ctx.exception.line, 1)


class AuxiliaryCsvTest(SimpleTestCase):

    def test_read_labels(self):
        obs = read_labels_csv(b'vertex_index,value\n3,0.5\n0,-1.25\n')
        assert_array_equal(obs.labeled, [3, 0])
        assert_array_equal(obs.values, [0.5, -1.25])

    def test_read_labels_rejects_bad_rows(self):
        for text in (
            b'index,value\n0,1\n',
            b'vertex_index,value\n0\n',
            b'vertex_index,value\nzero,1\n',
            b'vertex_index,value\n0,1\n0,2\n',
            b'vertex_index,value\n',
        ):
            with self.subTest(text=text):
                with self.assertRaises(CsvFormatError):
                    read_labels_csv(text)

    def test_signal_and_labels_share_a_format(self):
        signal = np.array([0.1, 1.0 / 3.0, -2.5])
        obs = read_labels_csv(write_signal_csv(signal))
        assert_array_equal(obs.labeled, [0, 1, 2])
        assert_array_equal(obs.values, signal)

    def test_estimate_csv(self):
        self.assertEqual(write_estimate_csv(np.array([0.5, 2.0])), b'index,value\n0,0.5\n1,2\n')

    def test_curve_csv(self):
        text = write_curve_csv([CurvePoint(0.25, 4.0, 2.0, 2.0)]).decode()
        self.assertEqual(text, 'tau,gamma,c,d\n0.25,4,2,2\n')
