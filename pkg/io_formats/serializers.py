"""
Serializers for experiment run configuration.

JSON already carries types, so the fields here refuse the string and bool
coercions DRF applies to form data: "7" is not an integer and true is not 1.
"""

from django.conf import settings
from rest_framework import serializers

from recovery import EpsRule, RecoveryError

METHODS = ('global_opt', 'local_opt', 'grid_search', 'harmonic')
NOISE_MODELS = ('uniform_centered', 'degree_proportional', 'inverse_degree_proportional')
OVERESTIMATION_TARGETS = ('eta', 'both')
MAX_SEED = 2 ** 64 - 1


class StrictIntegerField(serializers.IntegerField):
    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, int):
            self.fail('invalid')
        return super().to_internal_value(data)


class StrictFloatField(serializers.FloatField):
    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            self.fail('invalid')
        return super().to_internal_value(data)


class StrictBooleanField(serializers.BooleanField):
    def to_internal_value(self, data):
        if not isinstance(data, bool):
            self.fail('invalid')
        return data


class EpsRuleField(serializers.Field):
    """"literal_squared", "linear_2x" or {"explicit": value} as an EpsRule."""

    default_error_messages = {
        'invalid': 'expected "literal_squared", "linear_2x" or {{"explicit": <positive number>}}',
    }

    def to_internal_value(self, data):
        if isinstance(data, str) and data in ('literal_squared', 'linear_2x'):
            return EpsRule(data)
        if isinstance(data, dict) and set(data) == {'explicit'}:
            value = data['explicit']
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail('invalid')
            try:
                return EpsRule('explicit', float(value))
            except RecoveryError:
                self.fail('invalid')
        self.fail('invalid')

    def to_representation(self, value):
        return value.to_json()


class RunConfigSerializer(serializers.Serializer):
    """Validate an experiment run configuration; unknown keys are rejected."""
    dataset_path = serializers.CharField(max_length=1024)
    eta = StrictFloatField()
    eps_rule = EpsRuleField(default=EpsRule('literal_squared'))
    noise_model = serializers.ChoiceField(choices=NOISE_MODELS, default='uniform_centered')
    seed = StrictIntegerField(min_value=0, max_value=MAX_SEED)
    n_labeled_grid = serializers.ListField(child=StrictIntegerField(min_value=1), allow_empty=False)
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=METHODS), allow_empty=False, default=lambda: list(METHODS)
    )
    tau_grid_size = StrictIntegerField(min_value=1, default=200)
    overestimation_factor = StrictFloatField(default=1.0)
    overestimation_target = serializers.ChoiceField(choices=OVERESTIMATION_TARGETS, default='eta')
    num_trials = StrictIntegerField(min_value=1, default=lambda: settings.EXPERIMENT_DEFAULT_TRIALS)
    certify_local = StrictBooleanField(default=False)
    record_runtime = StrictBooleanField(default=False)

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({'non_field_errors': ['expected a JSON object']})
        errors = {key: ['unknown key'] for key in sorted(set(data) - set(self.fields))}
        try:
            value = super().to_internal_value(data)
        except serializers.ValidationError as e:
            errors.update(e.detail)
            value = None
        if errors:
            raise serializers.ValidationError(errors)
        return value

    def validate_eta(self, value):
        if not value > 0 or value == float('inf'):
            raise serializers.ValidationError('eta must be positive')
        return value

    def validate_overestimation_factor(self, value):
        if not 1.0 <= value < float('inf'):
            raise serializers.ValidationError('overestimation_factor must be at least 1')
        return value

    def validate_n_labeled_grid(self, value):
        if any(later <= earlier for earlier, later in zip(value, value[1:])):
            raise serializers.ValidationError('n_labeled_grid must be strictly increasing')
        return value

    def validate_methods(self, value):
        return list(dict.fromkeys(value))
