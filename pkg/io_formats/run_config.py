"""
Experiment run configuration.

AIDEV-NOTE: strict-config; Unknown keys and JSON type mismatches are errors, never coerced
"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple, Union

from recovery import EpsRule

from .serializers import METHODS, RunConfigSerializer

logger = logging.getLogger(__name__)


class ConfigValidationError(Exception):
    """Invalid run configuration; `errors` maps each key to its messages."""

    def __init__(self, errors: Dict[str, List[str]]):
        self.errors = errors
        parts = [f'{key}: {"; ".join(str(m) for m in messages)}' for key, messages in errors.items()]
        super().__init__(', '.join(parts))


@dataclass(frozen=True)
class RunConfig:
    dataset_path: str
    eta: float
    seed: int
    n_labeled_grid: Tuple[int, ...]
    eps_rule: EpsRule = EpsRule('literal_squared')
    noise_model: str = 'uniform_centered'
    methods: Tuple[str, ...] = METHODS
    tau_grid_size: int = 200
    overestimation_factor: float = 1.0
    overestimation_target: str = 'eta'
    num_trials: int = 10
    certify_local: bool = False
    record_runtime: bool = False

    def check_against(self, num_vertices: int) -> None:
        """
        Check the label counts against the graph size.

        Raises:
            ConfigValidationError: If the largest count exceeds num_vertices
        """
        if self.n_labeled_grid[-1] > num_vertices:
            raise ConfigValidationError({
                'n_labeled_grid': [f'values must be at most N={num_vertices}, got {self.n_labeled_grid[-1]}']
            })

    def to_dict(self) -> Dict:
        return {
            'dataset_path': self.dataset_path,
            'eta': self.eta,
            'eps_rule': self.eps_rule.to_json(),
            'noise_model': self.noise_model,
            'seed': self.seed,
            'n_labeled_grid': list(self.n_labeled_grid),
            'methods': list(self.methods),
            'tau_grid_size': self.tau_grid_size,
            'overestimation_factor': self.overestimation_factor,
            'overestimation_target': self.overestimation_target,
            'num_trials': self.num_trials,
            'certify_local': self.certify_local,
            'record_runtime': self.record_runtime,
        }


def _flatten(messages) -> List[str]:
    """DRF list fields report errors per item index; flatten them into one list."""
    if isinstance(messages, dict):
        return [f'item {index}: {text}' for index, nested in messages.items() for text in _flatten(nested)]
    if isinstance(messages, (list, tuple)):
        return [text for nested in messages for text in _flatten(nested)]
    return [str(messages)]


def validate_config(data: Union[Dict, object]) -> RunConfig:
    """Validate an already decoded JSON value."""
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        errors = {key: _flatten(messages) for key, messages in serializer.errors.items()}
        logger.warning(f'Rejected run configuration: {errors} [CONFIG-READ01]')
        raise ConfigValidationError(errors)
    values = dict(serializer.validated_data)
    values['n_labeled_grid'] = tuple(values['n_labeled_grid'])
    values['methods'] = tuple(values['methods'])
    return RunConfig(**values)


def read_config(text: Union[str, bytes]) -> RunConfig:
    """
    Parse and validate a JSON run configuration.

    Absent optional keys get their defaults (tau_grid_size=200,
    overestimation_factor=1, all four methods).

    Raises:
        ConfigValidationError: On invalid JSON, an unknown key, a type
            mismatch or a violated constraint
    """
    if isinstance(text, bytes):
        try:
            text = text.decode('utf-8')
        except UnicodeDecodeError as e:
            raise ConfigValidationError({'non_field_errors': [f'config is not valid UTF-8: {e}']})
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError({'non_field_errors': [f'invalid JSON: {e}']})
    return validate_config(data)
