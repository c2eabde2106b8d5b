"""
Management command to compute the regularized estimate for a fixed tau.
"""

from django.core.management.base import BaseCommand, CommandError

from cli.common import EXIT_INVALID, add_graph_arguments, add_output_argument, command_errors, emit_csv, load_inputs
from io_formats import write_estimate_csv
from recovery import regularize_with_limits


class Command(BaseCommand):
    help = 'Print Q Delta_tau(y), the regularized estimate of the quantity of interest, as CSV'

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        parser.add_argument('--tau', type=float, required=True, help='Regularization parameter in [0, 1]')
        add_output_argument(parser)

    def handle(self, *args, **options):
        if not 0.0 <= options['tau'] <= 1.0:
            raise CommandError(f'--tau must lie in [0, 1], got {options["tau"]}', returncode=EXIT_INVALID)
        with command_errors():
            _, bundle, obs, q = load_inputs(options)
            signal = regularize_with_limits(bundle, obs, options['tau'])
            estimate = q.materialize(bundle.num_vertices, obs.labeled) @ signal
            emit_csv(self, write_estimate_csv(estimate), options['out'])
