"""
Management command to run a label-growth experiment from a JSON config.
"""

import logging
import time
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from cli.common import EXIT_INVALID, add_output_argument, command_errors, emit_csv
from experiments.harness import run_label_growth
from experiments.models import ExperimentRun
from io_formats import load_graph, read_config, write_results_csv

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Run the label-growth experiment described by --config and write the results CSV'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run configuration JSON')
        add_output_argument(parser)
        parser.add_argument('--jobs', type=int, default=1, help='Parallel trial chunks through Celery (default 1)')

    def handle(self, *args, **options):
        if options['jobs'] < 1:
            raise CommandError(f'--jobs must be positive, got {options["jobs"]}', returncode=EXIT_INVALID)

        start = time.perf_counter()
        config = None
        try:
            with command_errors():
                config = read_config(Path(options['config']).read_bytes())
                graph = load_graph(config.dataset_path)
                outcome = run_label_growth(config, graph, jobs=options['jobs'])
                emit_csv(self, write_results_csv(outcome.rows), options['out'])
        except CommandError as e:
            ExperimentRun.log_run(
                dataset=config.dataset_path if config else '',
                config=config.to_dict() if config else {},
                output_path=options['out'] or '',
                success=False,
                error_message=str(e),
                execution_time_ms=int((time.perf_counter() - start) * 1000),
            )
            raise

        if outcome.violations:
            logger.warning(f'{len(outcome.violations)} certificate violation(s) in this run [CLI-EXPERIMENT01]')
        ExperimentRun.log_run(
            dataset=config.dataset_path,
            config=config.to_dict(),
            num_rows=len(outcome.rows),
            num_trials=config.num_trials,
            output_path=options['out'] or '',
            execution_time_ms=int((time.perf_counter() - start) * 1000),
        )
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f'Wrote {len(outcome.rows)} rows to {options["out"]}'))
