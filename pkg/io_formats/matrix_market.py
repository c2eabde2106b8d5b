"""
Matrix Market coordinate files as weighted graphs.

Accepted header: `%%MatrixMarket matrix coordinate <field> <symmetry>` with
field in {real, integer, pattern} and symmetry in {symmetric, general},
compared case-insensitively. Indices are 1-based. Pattern entries carry
weight 1; diagonal entries are dropped; duplicate entries are summed; a
general matrix is symmetrized as (A + A^T) / 2.

AIDEV-NOTE: mtx-lines; Every parse error names the 1-based line it was raised on
"""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from graph_core import Graph

logger = logging.getLogger(__name__)

HEADER_BANNER = '%%matrixmarket'
FIELDS = ('real', 'integer', 'pattern')
SYMMETRIES = ('symmetric', 'general')


class MatrixMarketParseError(Exception):
    """Malformed Matrix Market input; `line` is the offending 1-based line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f'{message} at line {line}'
        super().__init__(message)


def _parse_header(text: str) -> Tuple[str, str]:
    tokens = text.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != HEADER_BANNER:
        raise MatrixMarketParseError('malformed header', 1)
    _, obj, layout, field, symmetry = tokens
    if obj != 'matrix' or layout != 'coordinate':
        raise MatrixMarketParseError(f'unsupported format "{obj} {layout}"', 1)
    if field not in FIELDS:
        raise MatrixMarketParseError(f'unsupported field "{field}"', 1)
    if symmetry not in SYMMETRIES:
        raise MatrixMarketParseError(f'unsupported symmetry "{symmetry}"', 1)
    return field, symmetry


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketParseError(f'invalid {what} "{token}"', line)


def _parse_weight(token: str, field: str, line: int) -> float:
    try:
        weight = float(int(token)) if field == 'integer' else float(token)
    except ValueError:
        raise MatrixMarketParseError(f'invalid {field} value "{token}"', line)
    if not np.isfinite(weight):
        raise MatrixMarketParseError(f'non-finite value "{token}"', line)
    if weight < 0:
        raise MatrixMarketParseError('negative weight', line)
    return weight


def parse_matrix_market(data: Union[bytes, str]) -> Graph:
    """
    Parse a Matrix Market coordinate file into a Graph.

    Args:
        data: File contents as bytes (decoded as UTF-8) or text

    Returns:
        Graph with canonical edges

    Raises:
        MatrixMarketParseError: On a malformed header, size line or entry,
            a non-square matrix, an out-of-range index, a negative weight
            or an entry count that disagrees with the size line
    """
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as e:
            raise MatrixMarketParseError(f'input is not valid UTF-8: {e}')
    lines = data.splitlines()
    if not lines:
        raise MatrixMarketParseError('empty input', 1)

    field, symmetry = _parse_header(lines[0])

    size: Optional[Tuple[int, int, int]] = None
    rows: List[int] = []
    cols: List[int] = []
    weights: List[float] = []
    last_line = 1
    for number, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith('%'):
            continue
        last_line = number
        tokens = text.split()

        if size is None:
            if len(tokens) != 3:
                raise MatrixMarketParseError('malformed size line', number)
            num_rows, num_cols, nnz = (_parse_int(t, 'size', number) for t in tokens)
            if num_rows != num_cols:
                raise MatrixMarketParseError(f'matrix is not square ({num_rows} x {num_cols})', number)
            if num_rows < 1 or nnz < 0:
                raise MatrixMarketParseError('invalid size line', number)
            size = (num_rows, num_cols, nnz)
            continue

        expected = 2 if field == 'pattern' else 3
        if len(tokens) != expected:
            raise MatrixMarketParseError(f'expected {expected} fields, got {len(tokens)}', number)
        i = _parse_int(tokens[0], 'row index', number)
        j = _parse_int(tokens[1], 'column index', number)
        if not (1 <= i <= size[0] and 1 <= j <= size[0]):
            raise MatrixMarketParseError('index out of bounds', number)
        if len(rows) == size[2]:
            raise MatrixMarketParseError(f'more entries than the declared {size[2]}', number)
        weight = 1.0 if field == 'pattern' else _parse_weight(tokens[2], field, number)
        rows.append(i - 1)
        cols.append(j - 1)
        weights.append(weight)

    if size is None:
        raise MatrixMarketParseError('missing size line', last_line)
    num_vertices, _, nnz = size
    if len(rows) != nnz:
        raise MatrixMarketParseError(f'declared {nnz} entries but found {len(rows)}', last_line)

    row_index = np.asarray(rows, dtype=int)
    col_index = np.asarray(cols, dtype=int)
    values = np.asarray(weights, dtype=float)
    off_diagonal = row_index != col_index
    if not off_diagonal.all():
        logger.debug(f'Dropped {int((~off_diagonal).sum())} diagonal entr(ies) [MTX-PARSE01]')

    # (i, j) and (j, i) name the same edge in a symmetric file only
    pairs = np.column_stack([row_index[off_diagonal], col_index[off_diagonal]])
    if symmetry == 'symmetric':
        pairs = np.sort(pairs, axis=1)
    if len(pairs):
        _, counts = np.unique(pairs, axis=0, return_counts=True)
        duplicates = int(np.sum(counts - 1))
        if duplicates:
            logger.warning(f'Summed weights of {duplicates} duplicate entr(ies) [MTX-PARSE04]')

    matrix = sparse.coo_matrix(
        (values[off_diagonal], (row_index[off_diagonal], col_index[off_diagonal])),
        shape=(num_vertices, num_vertices),
    ).tocsr()

    if symmetry == 'symmetric':
        symmetric = matrix + matrix.T
    else:
        asymmetry = abs(matrix - matrix.T)
        if asymmetry.nnz and asymmetry.max() > 0:
            logger.warning(
                f'General matrix is not symmetric (max |A - A^T| = {asymmetry.max():.3g}), '
                f'using (A + A^T) / 2 [MTX-PARSE02]'
            )
        symmetric = (matrix + matrix.T) * 0.5

    upper = sparse.triu(symmetric, k=1).tocoo()
    edges = [(int(i), int(j), float(w)) for i, j, w in zip(upper.row, upper.col, upper.data) if w > 0]
    logger.info(f'Parsed {num_vertices}-vertex graph with {len(edges)} edge(s) [MTX-PARSE03]')
    return Graph.from_edges(num_vertices, edges)
