"""
Management command to tabulate the local worst-case error bound against tau.
"""

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from cli.common import (
    EXIT_INVALID,
    add_budget_arguments,
    add_graph_arguments,
    add_output_argument,
    command_errors,
    emit_csv,
    load_inputs,
    model_params,
)
from io_formats import write_curve_csv
from lwce_bound import lwce_curve


class Command(BaseCommand):
    help = 'Write tau,gamma,c,d rows of the lwce bound for tau = k / (n + 1), k = 1..n'

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        add_budget_arguments(parser)
        parser.add_argument('--tau-grid', type=int, default=20, help='Number of interior tau values (default 20)')
        add_output_argument(parser)

    def handle(self, *args, **options):
        size = options['tau_grid']
        if size < 1:
            raise CommandError(f'--tau-grid must be positive, got {size}', returncode=EXIT_INVALID)
        with command_errors():
            _, bundle, obs, q = load_inputs(options)
            taus = np.arange(1, size + 1) / (size + 1)
            points = lwce_curve(bundle, obs, q, model_params(options), taus)
            emit_csv(self, write_curve_csv(points), options['out'])
