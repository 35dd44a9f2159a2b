from rest_framework import serializers

from .models import VARIANT_CHOICES, EvaluationReport, Metrics

METRIC_NAMES = ('accuracy', 'precision', 'recall', 'f1')


class RunMetricsSerializer(serializers.Serializer):
    """Schema of one run entry of a report."""

    seed = serializers.IntegerField(min_value=0)
    tp = serializers.IntegerField(min_value=0)
    tn = serializers.IntegerField(min_value=0)
    fp = serializers.IntegerField(min_value=0)
    fn = serializers.IntegerField(min_value=0)
    accuracy = serializers.FloatField(min_value=0, max_value=1)
    precision = serializers.FloatField(min_value=0, max_value=1)
    recall = serializers.FloatField(min_value=0, max_value=1)
    f1 = serializers.FloatField(min_value=0, max_value=1)
    undefined = serializers.ListField(child=serializers.ChoiceField(choices=METRIC_NAMES),
                                      required=False)

    def validate(self, attrs):
        total = attrs['tp'] + attrs['tn'] + attrs['fp'] + attrs['fn']
        if total and abs(attrs['accuracy'] - (attrs['tp'] + attrs['tn']) / total) > 1e-12:
            raise serializers.ValidationError({
                'accuracy': "accuracy does not match the confusion counts."
            })
        return attrs


class DatasetInfoSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0)
    train = serializers.IntegerField(min_value=0)
    test = serializers.IntegerField(min_value=0)


class EvaluationReportSerializer(serializers.Serializer):
    """Schema of a variant report file."""

    variant = serializers.ChoiceField(choices=VARIANT_CHOICES)
    runs = RunMetricsSerializer(many=True, allow_empty=False)
    mean_accuracy = serializers.FloatField(min_value=0, max_value=1)
    std_accuracy = serializers.FloatField(min_value=0)
    precl_leakage = serializers.IntegerField(min_value=0)
    dataset = DatasetInfoSerializer()
    argmin_seed = serializers.IntegerField(min_value=0, allow_null=True)
    config = serializers.JSONField(required=False)

    def validate(self, attrs):
        seeds = [run['seed'] for run in attrs['runs']]
        if len(set(seeds)) != len(seeds):
            raise serializers.ValidationError({'runs': "run seeds must be distinct."})
        if attrs['argmin_seed'] is not None and attrs['argmin_seed'] not in seeds:
            raise serializers.ValidationError({
                'argmin_seed': "argmin_seed must be one of the run seeds."
            })
        return attrs

    def to_report(self):
        data = self.validated_data
        runs = [
            Metrics(
                tp=run['tp'], tn=run['tn'], fp=run['fp'], fn=run['fn'],
                accuracy=run['accuracy'], precision=run['precision'],
                recall=run['recall'], f1=run['f1'],
                undefined=tuple(run.get('undefined', ())),
            )
            for run in data['runs']
        ]
        # stored aggregates are kept as written
        return EvaluationReport(
            variant=data['variant'],
            seeds=tuple(run['seed'] for run in data['runs']),
            runs=tuple(runs),
            mean_accuracy=data['mean_accuracy'],
            std_accuracy=data['std_accuracy'],
            precl_leakage=data['precl_leakage'],
            dataset=dict(data['dataset']),
            argmin_seed=data['argmin_seed'],
            config=data.get('config'),
        )
