import csv
import io

from rest_framework import serializers

from core.exceptions import ArtifactParseError, DomainError
from core.files import atomic_write_text
from .models import (
    COVERAGE_CHOICES, DURATION_CHOICES, ORIGIN_LOADED, RECORD_FIELDS,
    Dataset, TaskRecord, compute_on_peak,
)

FLOAT_FIELDS = ('latitude', 'longitude')


class TaskRecordSerializer(serializers.Serializer):
    """Schema of one CSV row of a campaign dataset."""

    id = serializers.IntegerField(min_value=0)
    day = serializers.IntegerField(min_value=1)
    hour = serializers.IntegerField(min_value=0, max_value=23)
    minute = serializers.IntegerField(min_value=0, max_value=59)
    duration_min = serializers.ChoiceField(choices=DURATION_CHOICES)
    battery_pct = serializers.IntegerField(min_value=1, max_value=10)
    latitude = serializers.FloatField(min_value=-90, max_value=90)
    longitude = serializers.FloatField(min_value=-180, max_value=180)
    grid_number = serializers.IntegerField(min_value=0)
    on_peak = serializers.ChoiceField(choices=(0, 1))
    coverage_m = serializers.ChoiceField(choices=COVERAGE_CHOICES)
    legitimacy = serializers.ChoiceField(choices=(0, 1))

    def validate(self, attrs):
        if attrs['on_peak'] != compute_on_peak(attrs['hour']):
            raise serializers.ValidationError({
                'on_peak': "on_peak must be 1 exactly for hours 7 to 11."
            })
        return attrs

    def to_record(self):
        data = self.validated_data
        return TaskRecord(**{
            name: float(data[name]) if name in FLOAT_FIELDS else int(data[name])
            for name in RECORD_FIELDS
        })


def _format_value(name, value):
    if name in FLOAT_FIELDS:
        return f"{value:.6f}"
    return str(int(value))


def dataset_to_csv(dataset):
    """CSV text of a dataset: header row, LF line endings, 6-decimal floats."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(RECORD_FIELDS)
    for record in dataset:
        writer.writerow([_format_value(name, getattr(record, name)) for name in RECORD_FIELDS])
    return buffer.getvalue()


def write_dataset_csv(dataset, path):
    return atomic_write_text(path, dataset_to_csv(dataset))


def parse_dataset_csv(text, source='<text>'):
    """
    Parse and validate campaign CSV text.

    Raises ArtifactParseError naming the first offending line and field.
    """
    if not text.strip():
        raise ArtifactParseError(f"{source} is empty.", field='header', path=source)

    reader = csv.DictReader(io.StringIO(text))
    header = tuple(reader.fieldnames or ())
    if header != RECORD_FIELDS:
        missing = [name for name in RECORD_FIELDS if name not in header]
        field = missing[0] if missing else 'header'
        raise ArtifactParseError(
            f"{source}: header must be {','.join(RECORD_FIELDS)}.", field=field, path=source)

    records = []
    for line_number, row in enumerate(reader, start=2):
        serializer = TaskRecordSerializer(data=row)
        if not serializer.is_valid():
            field, messages = next(iter(serializer.errors.items()))
            raise ArtifactParseError(
                f"{source}, line {line_number}: {field}: {messages[0]}",
                field=field, path=source)
        records.append(serializer.to_record())

    try:
        return Dataset(tuple(records), origin=ORIGIN_LOADED)
    except DomainError as exc:
        raise ArtifactParseError(f"{source}: {exc}", field='id', path=source) from exc


def read_dataset_csv(path):
    with open(path, encoding='utf-8', newline='') as stream:
        return parse_dataset_csv(stream.read(), source=str(path))
