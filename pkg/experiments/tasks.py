"""
Celery tasks for experiments.

On-demand tasks:
- run_trials_task: Run a chunk of trials of one configuration

Arguments and results are plain JSON (config dict, graph dict, row dicts),
so a trial gives bit-identical rows in a worker and in-process.
"""

import logging
from dataclasses import asdict
from typing import Dict, Iterable, List

import numpy as np
from celery import group, shared_task

from graph_core import Graph, cached_laplacian
from io_formats import ResultRow, RunConfig, validate_config

from .harness import CertificateCheck, TrialOutcome, run_trial

logger = logging.getLogger(__name__)


def outcome_to_dict(outcome: TrialOutcome) -> Dict:
    return {
        'rows': [asdict(row) for row in outcome.rows],
        'checks': [asdict(check) for check in outcome.checks],
        'skipped': list(outcome.skipped),
    }


def outcome_from_dict(data: Dict) -> TrialOutcome:
    return TrialOutcome(
        rows=[ResultRow(**row) for row in data['rows']],
        checks=[CertificateCheck(**check) for check in data['checks']],
        skipped=list(data['skipped']),
    )


@shared_task
def run_trials_task(config_data: Dict, graph_data: Dict, trial_indices: List[int]) -> Dict:
    """
    Run the given trials and return their serialized outcome.

    Args:
        config_data: RunConfig.to_dict() output
        graph_data: Graph.to_dict() output
        trial_indices: Trial numbers to run
    """
    config = validate_config(config_data)
    graph = Graph.from_dict(graph_data)
    bundle = cached_laplacian(graph)
    outcome = TrialOutcome()
    for index in trial_indices:
        outcome.extend(run_trial(config, bundle, int(index)))
    logger.info(f'Task finished trials {list(trial_indices)} [TASK-TRIALS01]')
    return outcome_to_dict(outcome)


def run_trials_in_parallel(
    config: RunConfig,
    graph: Graph,
    trials: Iterable[int],
    jobs: int,
) -> List[TrialOutcome]:
    """Split the trials into at most `jobs` chunks and run them as a Celery group."""
    chunks = [chunk.tolist() for chunk in np.array_split(np.asarray(list(trials), dtype=int), jobs) if chunk.size]
    if not chunks:
        return []
    config_data, graph_data = config.to_dict(), graph.to_dict()
    logger.info(f'Dispatching {len(chunks)} trial chunk(s) [TASK-TRIALS02]')
    result = group(run_trials_task.s(config_data, graph_data, chunk) for chunk in chunks).apply_async()
    return [outcome_from_dict(data) for data in result.get()]
