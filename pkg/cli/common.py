"""
Shared pieces of the graphrecover management commands.

Exit codes: 0 success, 1 invalid input (flags, files, labels), 2 an
infeasible program. Commands raise CommandError with the matching
returncode; `command_errors` does the translation.

AIDEV-NOTE: stdout-results-only; Commands write results to stdout, diagnostics go to the logs
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Optional, Tuple

from django.core.management.base import BaseCommand, CommandError

from experiments.noise import NoiseModelError
from graph_core import Graph, GraphError, LaplacianBundle, cached_laplacian
from io_formats import (
    ConfigValidationError,
    CsvFormatError,
    DatasetError,
    MatrixMarketParseError,
    format_float,
    load_graph,
    read_labels_csv,
)
from param_select import InfeasibleProgramError
from recovery import ModelParams, Observation, QuantityOfInterest, RecoveryError
from spectral import SpectralError

logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

INVALID_INPUT_ERRORS = (
    ConfigValidationError,
    CsvFormatError,
    DatasetError,
    GraphError,
    MatrixMarketParseError,
    NoiseModelError,
    RecoveryError,
    SpectralError,
)


@contextmanager
def command_errors():
    """Translate library errors into CommandError exit codes."""
    try:
        yield
    except InfeasibleProgramError as e:
        logger.warning(f'Infeasible program: {e} [CLI-EXIT02]')
        raise CommandError(f'infeasible: {e}', returncode=EXIT_INFEASIBLE)
    except INVALID_INPUT_ERRORS as e:
        logger.warning(f'Invalid input: {e} [CLI-EXIT01]')
        raise CommandError(str(e), returncode=EXIT_INVALID)
    except OSError as e:
        raise CommandError(str(e), returncode=EXIT_INVALID)


def add_graph_arguments(parser, labels: bool = True, qoi: bool = True) -> None:
    parser.add_argument('--graph', required=True, help='Matrix Market file or catalog dataset name')
    if labels:
        parser.add_argument('--labels', required=True, help='Labels CSV with header vertex_index,value')
    if qoi:
        parser.add_argument(
            '--qoi', default='unlabeled', help='unlabeled, full, average or vertex:i (default unlabeled)'
        )


def add_budget_arguments(parser) -> None:
    parser.add_argument('--eps', type=float, required=True, help='Smoothness budget epsilon')
    parser.add_argument('--eta', type=float, required=True, help='Label-error budget eta')


def add_output_argument(parser) -> None:
    parser.add_argument('--out', help='Write the CSV here instead of standard output')


def load_inputs(options: Dict) -> Tuple[Graph, LaplacianBundle, Observation, Optional[QuantityOfInterest]]:
    """Graph, its Laplacian bundle, the labels and the quantity of interest named by the flags."""
    graph = load_graph(options['graph'])
    bundle = cached_laplacian(graph)
    obs = read_labels_csv(Path(options['labels']).read_bytes())
    obs.check_vertices(bundle.num_vertices)
    q = QuantityOfInterest.parse(options['qoi']) if options.get('qoi') else None
    return graph, bundle, obs, q


def model_params(options: Dict) -> ModelParams:
    return ModelParams(options['eps'], options['eta'])


def emit_csv(command: BaseCommand, data: bytes, out: Optional[str]) -> None:
    """Write CSV bytes to --out, or to the command's stdout."""
    if out:
        Path(out).write_bytes(data)
        logger.info(f'Wrote {len(data)} byte(s) to {out} [CLI-OUT01]')
    else:
        command.stdout.write(data.decode('utf-8'), ending='')


def emit_values(command: BaseCommand, values: Dict[str, object]) -> None:
    """key=value lines, floats with 17 significant digits."""
    for key, value in values.items():
        if isinstance(value, float):
            value = format_float(value)
        command.stdout.write(f'{key}={value}')
