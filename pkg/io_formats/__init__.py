"""Matrix Market graphs, run configuration and CSV files."""

from .csv_formats import (
    CsvFormatError,
    ResultRow,
    format_float,
    parse_results_csv,
    read_labels_csv,
    write_curve_csv,
    write_estimate_csv,
    write_results_csv,
    write_signal_csv,
)
from .datasets import DATASET_CATALOG, DatasetError, DatasetInfo, load_graph, resolve_dataset_path
from .matrix_market import MatrixMarketParseError, parse_matrix_market
from .run_config import ConfigValidationError, RunConfig, read_config, validate_config

__all__ = [
    'ConfigValidationError',
    'CsvFormatError',
    'DATASET_CATALOG',
    'DatasetError',
    'DatasetInfo',
    'MatrixMarketParseError',
    'ResultRow',
    'RunConfig',
    'format_float',
    'load_graph',
    'parse_matrix_market',
    'parse_results_csv',
    'read_config',
    'read_labels_csv',
    'resolve_dataset_path',
    'validate_config',
    'write_curve_csv',
    'write_estimate_csv',
    'write_results_csv',
    'write_signal_csv',
]
