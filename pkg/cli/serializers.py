from collections.abc import Mapping

from rest_framework import serializers

from pipeline.models import SELECTION_CHOICES, VARIANT_KEYS
from sofm.models import DECAY_CHOICES

OUTPUT_FORMATS = ('text', 'json', 'csv')
VARIANT_ALL = 'all'


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects keys it does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({unknown[0]: ["unknown field."]})
        return super().to_internal_value(data)


class GenerationSectionSerializer(StrictSerializer):
    total_tasks = serializers.IntegerField(min_value=1, required=False)
    fake_fraction = serializers.FloatField(min_value=0, max_value=1, required=False)
    num_days = serializers.IntegerField(min_value=1, required=False)
    center = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2,
                                   required=False)
    half_side_m = serializers.FloatField(min_value=0, required=False)
    grid_cell_m = serializers.FloatField(min_value=0, required=False)
    attack_zone_count = serializers.IntegerField(min_value=0, required=False)
    attack_zone_radius_m = serializers.FloatField(min_value=0, required=False)


class SplitSectionSerializer(StrictSerializer):
    train_fraction = serializers.FloatField(min_value=0, max_value=1, required=False)


class FeaturesSectionSerializer(StrictSerializer):
    top_k = serializers.IntegerField(min_value=1, required=False)
    relieff_k = serializers.IntegerField(min_value=1, required=False)
    relieff_samples = serializers.IntegerField(min_value=1, allow_null=True, required=False)
    selection = serializers.ChoiceField(choices=SELECTION_CHOICES, required=False)
    indices = serializers.ListField(child=serializers.IntegerField(min_value=0),
                                    allow_null=True, allow_empty=False, required=False)


class SofmSectionSerializer(StrictSerializer):
    rows = serializers.IntegerField(min_value=1, required=False)
    cols = serializers.IntegerField(min_value=1, required=False)
    epochs = serializers.IntegerField(min_value=1, required=False)
    alpha0 = serializers.FloatField(min_value=0, max_value=1, required=False)
    sigma0 = serializers.FloatField(min_value=0, required=False)
    alpha_min = serializers.FloatField(min_value=0, required=False)
    sigma_min = serializers.FloatField(min_value=0, required=False)
    decay = serializers.ChoiceField(choices=DECAY_CHOICES, required=False)
    purity_threshold = serializers.FloatField(min_value=0.5, max_value=1, required=False)


class TrainingSectionSerializer(StrictSerializer):
    epochs = serializers.IntegerField(min_value=0, required=False)
    batch_size = serializers.IntegerField(min_value=1, required=False)
    learning_rate = serializers.FloatField(min_value=0, required=False)
    momentum = serializers.FloatField(min_value=0, max_value=1, required=False)
    patience = serializers.IntegerField(min_value=1, required=False)
    threshold = serializers.FloatField(min_value=0, max_value=1, required=False)
    hidden_layers = serializers.ListField(child=serializers.IntegerField(min_value=1),
                                          allow_empty=False, required=False)


class ExperimentConfigSerializer(StrictSerializer):
    """
    Schema of a --config file. Every key is optional; whatever is present
    overrides the settings defaults section by section.
    """

    seed = serializers.IntegerField(min_value=0, required=False)
    out_dir = serializers.CharField(required=False)
    format = serializers.ChoiceField(choices=OUTPUT_FORMATS, required=False)
    workers = serializers.IntegerField(min_value=1, required=False)
    runs = serializers.IntegerField(min_value=1, required=False)
    dataset = serializers.CharField(allow_null=True, required=False)
    variant = serializers.ChoiceField(choices=(VARIANT_ALL, *VARIANT_KEYS), required=False)
    generation = GenerationSectionSerializer(required=False)
    split = SplitSectionSerializer(required=False)
    features = FeaturesSectionSerializer(required=False)
    sofm = SofmSectionSerializer(required=False)
    training = TrainingSectionSerializer(required=False)


def first_error(errors, prefix=''):
    """Dotted path and message of the first validation error."""
    if isinstance(errors, Mapping):
        name, value = next(iter(errors.items()))
        path = f"{prefix}.{name}" if prefix else str(name)
        return first_error(value, path)
    if isinstance(errors, list) and errors:
        return first_error(errors[0], prefix)
    return prefix, str(errors)
