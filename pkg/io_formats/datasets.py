"""
Benchmark network catalog.

The five networks are read from DATASET_DIR/<name>.mtx as shipped by the
SuiteSparse collection. netscience is restricted to its largest connected
component; the others are used whole.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

from django.conf import settings

from graph_core import Graph, largest_component

from .matrix_market import parse_matrix_market

logger = logging.getLogger(__name__)


class DatasetError(Exception):
    """A dataset could not be located or read."""
    pass


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    num_vertices: int
    num_edges: int
    largest_component_only: bool = False


DATASET_CATALOG: Dict[str, DatasetInfo] = {
    info.name: info for info in (
        DatasetInfo('adjnoun', 112, 425),
        DatasetInfo('netscience', 379, 914, largest_component_only=True),
        DatasetInfo('polbooks', 105, 441),
        DatasetInfo('lesmis', 77, 254),
        DatasetInfo('dolphins', 62, 159),
    )
}


def resolve_dataset_path(path_or_name: Union[str, Path]) -> Path:
    """
    A catalog name maps to DATASET_DIR/<name>.mtx. A relative path that
    does not exist from the working directory is looked up in DATASET_DIR.
    """
    text = str(path_or_name)
    dataset_dir = Path(settings.DATASET_DIR)
    if text in DATASET_CATALOG:
        return dataset_dir / f'{text}.mtx'
    path = Path(text)
    if not path.is_absolute() and not path.exists() and (dataset_dir / path).exists():
        return dataset_dir / path
    return path


def load_graph(path_or_name: Union[str, Path]) -> Graph:
    """
    Load a graph by catalog name or Matrix Market path.

    For catalog entries the vertex and edge counts are compared with the
    published sizes; a mismatch is logged but not fatal.

    Raises:
        DatasetError: If the file is missing or unreadable
        MatrixMarketParseError: If the file is malformed
    """
    path = resolve_dataset_path(path_or_name)
    try:
        data = path.read_bytes()
    except OSError as e:
        logger.error(f'Cannot read dataset {path}: {e} [DATASET-LOAD01]')
        raise DatasetError(f'cannot read dataset {path}: {e}')

    graph = parse_matrix_market(data)
    info = DATASET_CATALOG.get(path.stem)
    if info is not None and info.largest_component_only:
        graph = largest_component(graph)
    if info is not None and (graph.num_vertices, graph.num_edges) != (info.num_vertices, info.num_edges):
        logger.warning(
            f'Dataset {info.name} has {graph.num_vertices} vertices and {graph.num_edges} edges, '
            f'expected {info.num_vertices} and {info.num_edges} [DATASET-LOAD02]'
        )
    logger.info(f'Loaded {path} ({graph.num_vertices} vertices) [DATASET-LOAD03]')
    return graph
