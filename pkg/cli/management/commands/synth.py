"""
Management command to draw a normalized smooth signal on a graph.
"""

from django.core.management.base import BaseCommand, CommandError

from cli.common import EXIT_INVALID, add_graph_arguments, add_output_argument, command_errors, emit_csv
from experiments.synthesis import synth_signal
from graph_core import cached_laplacian
from io_formats import load_graph, write_signal_csv
from io_formats.serializers import MAX_SEED


class Command(BaseCommand):
    help = 'Write a random smooth signal in [0, 1] as vertex_index,value CSV'

    def add_arguments(self, parser):
        add_graph_arguments(parser, labels=False, qoi=False)
        parser.add_argument('--seed', type=int, required=True, help='Unsigned 64-bit seed')
        add_output_argument(parser)

    def handle(self, *args, **options):
        if not 0 <= options['seed'] <= MAX_SEED:
            raise CommandError(f'--seed must be an unsigned 64-bit integer, got {options["seed"]}',
                               returncode=EXIT_INVALID)
        with command_errors():
            bundle = cached_laplacian(load_graph(options['graph']))
            emit_csv(self, write_signal_csv(synth_signal(bundle, options['seed'])), options['out'])
