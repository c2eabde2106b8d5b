"""
CSV files read and written by the experiment harness and the CLI.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly. Lines end in a bare newline.
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from recovery import Observation, RecoveryError

logger = logging.getLogger(__name__)

RESULTS_HEADER = (
    'n_labeled', 'method', 'trial', 'seed', 'tau', 'prediction_error', 'certified_bound', 'runtime_ms'
)
LABELS_HEADER = ('vertex_index', 'value')
CURVE_HEADER = ('tau', 'gamma', 'c', 'd')
ESTIMATE_HEADER = ('index', 'value')


class CsvFormatError(Exception):
    """Malformed CSV input; `line` is the offending 1-based line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f'{message} at line {line}'
        super().__init__(message)


def format_float(value: float) -> str:
    return format(float(value), '.17g')


@dataclass(frozen=True)
class ResultRow:
    """
    One method's outcome on one trial at one label count.

    certified_bound is None for methods that carry no bound; it is written
    as an empty field.
    """
    n_labeled: int
    method: str
    trial: int
    seed: int
    tau: float
    prediction_error: float
    certified_bound: Optional[float] = None
    runtime_ms: float = 0.0

    @property
    def sort_key(self):
        return (self.n_labeled, self.method, self.trial)

    def to_fields(self) -> List[str]:
        return [
            str(self.n_labeled),
            self.method,
            str(self.trial),
            str(self.seed),
            format_float(self.tau),
            format_float(self.prediction_error),
            '' if self.certified_bound is None else format_float(self.certified_bound),
            format_float(self.runtime_ms),
        ]


def _write(header: Sequence[str], rows: Iterable[Sequence[str]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode('utf-8')


def _read(data: Union[bytes, str], header: Sequence[str]) -> List[List[str]]:
    """Rows after an exact header match, blank lines skipped."""
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as e:
            raise CsvFormatError(f'input is not valid UTF-8: {e}')
    reader = csv.reader(io.StringIO(data))
    rows = list(reader)
    if not rows or tuple(cell.strip() for cell in rows[0]) != tuple(header):
        raise CsvFormatError(f'expected header "{",".join(header)}"', 1)
    return rows[1:]


def write_results_csv(rows: Iterable[ResultRow]) -> bytes:
    """Results CSV, rows ordered by (n_labeled, method, trial)."""
    ordered = sorted(rows, key=lambda row: row.sort_key)
    logger.debug(f'Writing {len(ordered)} result row(s) [CSV-WRITE01]')
    return _write(RESULTS_HEADER, (row.to_fields() for row in ordered))


def parse_results_csv(data: Union[bytes, str]) -> List[ResultRow]:
    """
    Read a results CSV written by `write_results_csv`.

    Raises:
        CsvFormatError: On a wrong header, field count or value
    """
    parsed = []
    for number, fields in enumerate(_read(data, RESULTS_HEADER), start=2):
        if not fields:
            continue
        if len(fields) != len(RESULTS_HEADER):
            raise CsvFormatError(f'expected {len(RESULTS_HEADER)} fields, got {len(fields)}', number)
        try:
            parsed.append(ResultRow(
                n_labeled=int(fields[0]),
                method=fields[1],
                trial=int(fields[2]),
                seed=int(fields[3]),
                tau=float(fields[4]),
                prediction_error=float(fields[5]),
                certified_bound=None if fields[6] == '' else float(fields[6]),
                runtime_ms=float(fields[7]),
            ))
        except ValueError as e:
            raise CsvFormatError(f'invalid value ({e})', number)
    return parsed


def read_labels_csv(data: Union[bytes, str]) -> Observation:
    """
    Labels CSV with header `vertex_index,value` as an Observation.

    Raises:
        CsvFormatError: On a wrong header, a malformed row or an invalid
            labeled set (repeated index, non-finite value, no rows)
    """
    labeled, values = [], []
    for number, fields in enumerate(_read(data, LABELS_HEADER), start=2):
        if not fields:
            continue
        if len(fields) != 2:
            raise CsvFormatError(f'expected 2 fields, got {len(fields)}', number)
        try:
            labeled.append(int(fields[0]))
            values.append(float(fields[1]))
        except ValueError as e:
            raise CsvFormatError(f'invalid value ({e})', number)
    try:
        return Observation(labeled, values)
    except RecoveryError as e:
        raise CsvFormatError(f'invalid labels: {e}')


def write_signal_csv(signal: np.ndarray) -> bytes:
    """Signal on all vertices, header `vertex_index,value`."""
    signal = np.asarray(signal, dtype=float).reshape(-1)
    return _write(LABELS_HEADER, ([str(i), format_float(v)] for i, v in enumerate(signal)))


def write_estimate_csv(estimate: np.ndarray) -> bytes:
    """Estimated quantity of interest, header `index,value`."""
    estimate = np.asarray(estimate, dtype=float).reshape(-1)
    return _write(ESTIMATE_HEADER, ([str(i), format_float(v)] for i, v in enumerate(estimate)))


def write_curve_csv(points: Iterable) -> bytes:
    """lwce curve points (anything with tau, gamma, c and d), header `tau,gamma,c,d`."""
    return _write(
        CURVE_HEADER,
        ([format_float(p.tau), format_float(p.gamma), format_float(p.c), format_float(p.d)] for p in points),
    )
