import csv
import io

import numpy as np
from rest_framework import serializers

from .models import (
    DECAY_CHOICES, MARK_CHOICES, MARK_LEGITIMATE_ONLY, MARK_MIXED, SofmMap, SofmParams,
)

CONTINGENCY_HEADER = (
    'cluster', 'mark', 'train_legitimate', 'train_fake', 'test_legitimate', 'test_fake',
)


class SofmParamsSerializer(serializers.Serializer):
    """Schema of the map training schedule."""

    epochs = serializers.IntegerField(min_value=1)
    alpha0 = serializers.FloatField(min_value=0, max_value=1)
    sigma0 = serializers.FloatField(min_value=0)
    alpha_min = serializers.FloatField(min_value=0)
    sigma_min = serializers.FloatField(min_value=0)
    rng_seed = serializers.IntegerField(min_value=0)
    decay = serializers.ChoiceField(choices=DECAY_CHOICES)


class SofmMapSerializer(serializers.Serializer):
    """Schema of a serialized map."""

    rows = serializers.IntegerField(min_value=1)
    cols = serializers.IntegerField(min_value=1)
    feature_names = serializers.ListField(child=serializers.CharField())
    weights = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), allow_empty=False),
        allow_empty=False)
    cluster_marks = serializers.ListField(child=serializers.ChoiceField(choices=MARK_CHOICES),
                                          allow_null=True)
    trained = serializers.BooleanField()
    params = SofmParamsSerializer(allow_null=True)
    seed = serializers.IntegerField(min_value=0, allow_null=True)

    def validate(self, attrs):
        neurons = attrs['rows'] * attrs['cols']
        if len(attrs['weights']) != neurons:
            raise serializers.ValidationError({
                'weights': f"expected {neurons} weight vectors, got {len(attrs['weights'])}."
            })
        width = len(attrs['weights'][0])
        if any(len(vector) != width for vector in attrs['weights']):
            raise serializers.ValidationError({'weights': "weight vectors differ in length."})
        if attrs['feature_names'] and len(attrs['feature_names']) != width:
            raise serializers.ValidationError({
                'feature_names': "one name per weight component is required."
            })
        marks = attrs['cluster_marks']
        if marks is not None and len(marks) != neurons:
            raise serializers.ValidationError({
                'cluster_marks': f"expected {neurons} cluster marks, got {len(marks)}."
            })
        return attrs

    def to_map(self):
        data = self.validated_data
        marks = data['cluster_marks']
        return SofmMap(
            rows=data['rows'],
            cols=data['cols'],
            weights=np.array(data['weights'], dtype=np.float64),
            cluster_marks=tuple(marks) if marks is not None else None,
            trained=data['trained'],
            params=SofmParams(**data['params']) if data['params'] else None,
            rng_seed=data['seed'],
            feature_names=tuple(data['feature_names']),
        )


def map_to_payload(sofm_map):
    return {
        'rows': int(sofm_map.rows),
        'cols': int(sofm_map.cols),
        'feature_names': list(sofm_map.feature_names),
        'weights': sofm_map.weights.tolist(),
        'cluster_marks': list(sofm_map.cluster_marks) if sofm_map.is_labeled else None,
        'trained': bool(sofm_map.trained),
        'params': sofm_map.params.describe() if sofm_map.params else None,
        'seed': sofm_map.rng_seed,
    }


def contingency_to_csv(sofm_map, train_counts, test_counts):
    """
    Per-neuron legitimate / fake counts for training and test data, neurons
    numbered from 1 in row-major order, followed by PrecL and mixed totals.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CONTINGENCY_HEADER)
    marks = sofm_map.cluster_marks
    for neuron in range(sofm_map.neuron_count):
        writer.writerow([neuron + 1, marks[neuron], *train_counts[neuron], *test_counts[neuron]])

    pure = np.array([mark == MARK_LEGITIMATE_ONLY for mark in marks], dtype=bool)
    for name, mark, mask in (('precl', MARK_LEGITIMATE_ONLY, pure), ('mixed', MARK_MIXED, ~pure)):
        totals = [int(train_counts[mask, 0].sum()), int(train_counts[mask, 1].sum()),
                  int(test_counts[mask, 0].sum()), int(test_counts[mask, 1].sum())]
        writer.writerow([name, mark, *totals])
    return buffer.getvalue()
