"""
Management command to select tau globally and report the certified bound.
"""

from django.core.management.base import BaseCommand, CommandError

from cli.common import (
    EXIT_INVALID,
    add_budget_arguments,
    add_graph_arguments,
    command_errors,
    emit_values,
    load_inputs,
    model_params,
)
from param_select import estimate_functional, solve_global


class Command(BaseCommand):
    help = 'Solve the two-multiplier program and print c, d, tau and the worst-case error bound'

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        add_budget_arguments(parser)
        parser.add_argument(
            '--functional', action='store_true',
            help='One-row quantities only: print the optimal weights estimate and its bound',
        )

    def handle(self, *args, **options):
        with command_errors():
            _, bundle, obs, q = load_inputs(options)
            params = model_params(options)
            qoi_matrix = q.materialize(bundle.num_vertices, obs.labeled)

            if options['functional']:
                if qoi_matrix.shape[0] != 1:
                    raise CommandError(
                        f'--functional needs a one-row quantity of interest, {q} has {qoi_matrix.shape[0]}',
                        returncode=EXIT_INVALID,
                    )
                result = estimate_functional(qoi_matrix[0], bundle, obs, params)
                emit_values(self, {
                    'estimate': float(result.weights @ obs.values),
                    'gwce_bound': float(result.gwce_value),
                })
                return

            solution = solve_global(bundle, obs, qoi_matrix, params)
            emit_values(self, {
                'c': float(solution.c_flat),
                'd': float(solution.d_flat),
                'tau': float(solution.tau_flat),
                'gwce_sq_bound': float(solution.gwce_sq_bound),
                'gwce_bound': float(solution.gwce_bound),
                'regime': solution.regime,
            })
