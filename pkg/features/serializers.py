from rest_framework import serializers

from .models import FeatureRanking


class FeatureRankingSerializer(serializers.Serializer):
    """Schema of ranking.json."""

    weights = serializers.ListField(
        child=serializers.FloatField(min_value=-1.0, max_value=1.0), allow_empty=False)
    order = serializers.ListField(child=serializers.IntegerField(min_value=0))
    selected = serializers.ListField(child=serializers.IntegerField(min_value=0),
                                     allow_empty=False)
    feature_names = serializers.ListField(child=serializers.CharField(), required=False)

    def validate(self, attrs):
        size = len(attrs['weights'])
        if sorted(attrs['order']) != list(range(size)):
            raise serializers.ValidationError({
                'order': "order must be a permutation of the feature indices."
            })
        if any(index >= size for index in attrs['selected']):
            raise serializers.ValidationError({'selected': "selected index out of range."})
        names = attrs.get('feature_names')
        if names and len(names) != size:
            raise serializers.ValidationError({
                'feature_names': "one name per weight is required."
            })
        return attrs

    def to_ranking(self):
        data = self.validated_data
        return FeatureRanking.from_weights(data['weights'], data.get('feature_names', ()))
