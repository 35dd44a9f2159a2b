import numpy as np
from rest_framework import serializers

from .models import ACTIVATION_SIGMOID, ACTIVATION_TANH, MlpNetwork, TrainParams


class TrainParamsSerializer(serializers.Serializer):
    """Schema of the training parameters."""

    epochs = serializers.IntegerField(min_value=0)
    batch_size = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField(min_value=0)
    momentum = serializers.FloatField(min_value=0, max_value=1)
    rng_seed = serializers.IntegerField(min_value=0)
    patience = serializers.IntegerField(min_value=1)

    def validate_learning_rate(self, value):
        if value <= 0:
            raise serializers.ValidationError("learning_rate must be positive.")
        return value


class InputFeaturesSerializer(serializers.Serializer):
    """Feature names and min-max scaling the network expects."""

    names = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    minimums = serializers.ListField(child=serializers.FloatField(), allow_empty=False)
    maximums = serializers.ListField(child=serializers.FloatField(), allow_empty=False)

    def validate(self, attrs):
        if not len(attrs['names']) == len(attrs['minimums']) == len(attrs['maximums']):
            raise serializers.ValidationError({
                'names': "names, minimums and maximums must have equal lengths."
            })
        return attrs


class NetworkSerializer(serializers.Serializer):
    """Schema of a serialized network model."""

    layer_sizes = serializers.ListField(child=serializers.IntegerField(min_value=1),
                                        min_length=2)
    weights = serializers.ListField(
        child=serializers.ListField(child=serializers.ListField(child=serializers.FloatField())))
    biases = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    hidden_activation = serializers.ChoiceField(choices=(ACTIVATION_TANH,))
    output_activation = serializers.ChoiceField(choices=(ACTIVATION_SIGMOID,))
    seed = serializers.IntegerField(min_value=0, allow_null=True)
    train_params = TrainParamsSerializer(allow_null=True)
    input = InputFeaturesSerializer(required=False)

    def validate(self, attrs):
        sizes = attrs['layer_sizes']
        if sizes[-1] != 1:
            raise serializers.ValidationError({'layer_sizes': "the output layer must have one unit."})
        if len(attrs['weights']) != len(sizes) - 1:
            raise serializers.ValidationError({'weights': "one weight matrix per layer transition."})
        if len(attrs['biases']) != len(sizes) - 1:
            raise serializers.ValidationError({'biases': "one bias vector per layer transition."})
        for index, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            matrix = attrs['weights'][index]
            if len(matrix) != fan_in or any(len(row) != fan_out for row in matrix):
                raise serializers.ValidationError({
                    'weights': f"matrix {index} must be {fan_in}x{fan_out}."
                })
            if len(attrs['biases'][index]) != fan_out:
                raise serializers.ValidationError({
                    'biases': f"bias {index} must have {fan_out} entries."
                })
        features = attrs.get('input')
        if features and len(features['names']) != sizes[0]:
            raise serializers.ValidationError({
                'input': "one input feature per network input is required."
            })
        return attrs

    def to_network(self):
        data = self.validated_data
        params = data['train_params']
        return MlpNetwork(
            layer_sizes=tuple(data['layer_sizes']),
            weights=[np.array(matrix, dtype=np.float64) for matrix in data['weights']],
            biases=[np.array(vector, dtype=np.float64) for vector in data['biases']],
            hidden_activation=data['hidden_activation'],
            output_activation=data['output_activation'],
            rng_seed=data['seed'],
            train_params=TrainParams(**params) if params else None,
        )


def network_to_payload(network, input_features=None):
    """JSON-ready dict of a network; input_features holds names and scaling."""
    payload = {
        'layer_sizes': [int(size) for size in network.layer_sizes],
        'weights': [w.tolist() for w in network.weights],
        'biases': [b.tolist() for b in network.biases],
        'hidden_activation': network.hidden_activation,
        'output_activation': network.output_activation,
        'seed': network.rng_seed,
        'train_params': network.train_params.describe() if network.train_params else None,
    }
    if input_features is not None:
        payload['input'] = {
            'names': list(input_features['names']),
            'minimums': [float(v) for v in input_features['minimums']],
            'maximums': [float(v) for v in input_features['maximums']],
        }
    return payload
