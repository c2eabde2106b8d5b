"""
Management command to select tau locally by balancing the two constraints.
"""

from django.core.management.base import BaseCommand

from cli.common import (
    add_budget_arguments,
    add_graph_arguments,
    command_errors,
    emit_values,
    load_inputs,
    model_params,
)
from io_formats import write_estimate_csv
from param_select import solve_local


class Command(BaseCommand):
    help = 'Print the balancing tau, its residual and minimax value, then the estimate as CSV'

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        add_budget_arguments(parser)

    def handle(self, *args, **options):
        with command_errors():
            _, bundle, obs, q = load_inputs(options)
            solution = solve_local(bundle, obs, model_params(options))
            estimate = q.materialize(bundle.num_vertices, obs.labeled) @ solution.f_hat
            emit_values(self, {
                'tau': float(solution.tau_natural),
                'balance_residual': float(solution.balance_residual),
                'minimax_value': float(solution.minimax_value),
                'degenerate': str(solution.degenerate).lower(),
            })
            self.stdout.write('')
            self.stdout.write(write_estimate_csv(estimate).decode('utf-8'), ending='')
