from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.exceptions import ConfigurationError, DomainError
from core.validators import ConfigValidationMixin
from .geo import GridSpec, bounding_box_around, degree_span

# CSV column order of a task record
RECORD_FIELDS = (
    'id', 'day', 'hour', 'minute', 'duration_min', 'battery_pct', 'latitude',
    'longitude', 'grid_number', 'on_peak', 'coverage_m', 'legitimacy',
)

# The ten feature columns a submitted task carries
FEATURE_COLUMNS = (
    'day', 'hour', 'minute', 'duration_min', 'battery_pct', 'latitude',
    'longitude', 'grid_number', 'on_peak', 'coverage_m',
)

# Day only enumerates the campaign and carries no legitimacy signal
CANDIDATE_FEATURES = tuple(name for name in FEATURE_COLUMNS if name != 'day')

DURATION_CHOICES = (10, 20, 30, 40, 50, 60)
COVERAGE_CHOICES = (50, 100, 150, 200)
ON_PEAK_HOURS = (7, 11)

LEGITIMATE = 1
FAKE = 0

ORIGIN_GENERATED = 'generated'
ORIGIN_LOADED = 'loaded'
ORIGIN_CHOICES = (
    (ORIGIN_GENERATED, 'Generated'),
    (ORIGIN_LOADED, 'Loaded'),
)

DEFAULT_CENTER = (48.4758, -81.3305)
DEFAULT_BOUNDING_BOX = bounding_box_around(*DEFAULT_CENTER, 5000.0)


def compute_on_peak(hour):
    """1 when the hour falls in the busy 7am-11am window (both ends included)."""
    if not 0 <= hour <= 23:
        raise DomainError(f"hour must lie in [0, 23], got {hour}.")
    return 1 if ON_PEAK_HOURS[0] <= hour <= ON_PEAK_HOURS[1] else 0


@dataclass(frozen=True)
class TaskRecord:
    """
    One submitted crowdsensing task.
    """
    id: int
    day: int
    hour: int
    minute: int
    duration_min: int
    battery_pct: int
    latitude: float
    longitude: float
    grid_number: int
    on_peak: int
    coverage_m: int
    legitimacy: int

    @property
    def is_legitimate(self):
        return self.legitimacy == LEGITIMATE

    @property
    def chronological_key(self):
        return (self.day, self.hour, self.minute)

    def as_row(self):
        return tuple(getattr(self, name) for name in RECORD_FIELDS)


@dataclass(frozen=True)
class AttackZone(ConfigValidationMixin):
    """Disc from which an adversary submits fake tasks."""
    center_lat: float
    center_lon: float
    radius_m: float = 200.0

    def __post_init__(self):
        self.validate_positive_number(self.radius_m, 'radius_m')


@dataclass(frozen=True)
class GenerationConfig(ConfigValidationMixin):
    """
    Parameters of one synthetic campaign.

    Validation is deferred to ``validate()`` so that invalid configurations
    can be built, inspected and rejected by the generator.
    """
    total_tasks: int = 14306
    fake_fraction: float = 0.124
    num_days: int = 6
    bounding_box: Tuple[float, float, float, float] = DEFAULT_BOUNDING_BOX
    grid_cell_m: float = 1000.0
    attack_zones: Tuple[AttackZone, ...] = field(default_factory=tuple)
    rng_seed: int = 7

    def validate(self):
        if not isinstance(self.total_tasks, (int, np.integer)) or self.total_tasks <= 0:
            raise ConfigurationError(
                f"total_tasks must be a positive integer, got {self.total_tasks!r}.",
                details={'field': 'total_tasks'},
            )
        self.validate_open_fraction(self.fake_fraction, 'fake_fraction')
        if not isinstance(self.num_days, (int, np.integer)) or self.num_days < 1:
            raise ConfigurationError(
                f"num_days must be a positive integer, got {self.num_days!r}.",
                details={'field': 'num_days'},
            )
        lat_min, lat_max, lon_min, lon_max = self.bounding_box
        if not (lat_min < lat_max and lon_min < lon_max):
            raise ConfigurationError(
                f"bounding_box {self.bounding_box} is degenerate.",
                details={'field': 'bounding_box'},
            )
        self.validate_positive_number(self.grid_cell_m, 'grid_cell_m')
        self.validate_seed(self.rng_seed)
        if self.fake_count > 0 and not self.attack_zones:
            raise ConfigurationError(
                "fake tasks requested but no attack zones configured.",
                details={'field': 'attack_zones'},
            )
        for index, zone in enumerate(self.attack_zones):
            if not self.zone_inside_box(zone):
                raise ConfigurationError(
                    f"attack zone {index} does not fit inside the bounding box.",
                    details={'field': f'attack_zones[{index}]'},
                )
        return self

    def zone_inside_box(self, zone):
        lat_min, lat_max, lon_min, lon_max = self.bounding_box
        dlat, _ = degree_span(zone.center_lat, zone.radius_m)
        # widest longitude span occurs at the poleward edge of the disc
        _, dlon = degree_span(abs(zone.center_lat) + dlat, zone.radius_m)
        return (lat_min <= zone.center_lat - dlat and zone.center_lat + dlat <= lat_max
                and lon_min <= zone.center_lon - dlon and zone.center_lon + dlon <= lon_max)

    @property
    def fake_count(self):
        # round half up, independent of banker's rounding
        return int(np.floor(self.total_tasks * self.fake_fraction + 0.5))

    @property
    def legitimate_count(self):
        return self.total_tasks - self.fake_count

    def grid(self):
        return GridSpec.for_box(self.bounding_box, self.grid_cell_m)

    def describe(self):
        return {
            'total_tasks': int(self.total_tasks),
            'fake_fraction': float(self.fake_fraction),
            'num_days': int(self.num_days),
            'bounding_box': [float(v) for v in self.bounding_box],
            'grid_cell_m': float(self.grid_cell_m),
            'attack_zones': [
                {'center_lat': z.center_lat, 'center_lon': z.center_lon, 'radius_m': z.radius_m}
                for z in self.attack_zones
            ],
            'rng_seed': int(self.rng_seed),
        }


@dataclass(frozen=True)
class Dataset:
    """
    Chronologically ordered, immutable collection of task records.
    """
    records: Tuple[TaskRecord, ...]
    origin: str = ORIGIN_GENERATED

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, 'records', records)
        ids = [record.id for record in records]
        if len(set(ids)) != len(ids):
            raise DomainError("Dataset record ids must be unique.")
        keys = [record.chronological_key for record in records]
        if any(later < earlier for earlier, later in zip(keys, keys[1:])):
            raise DomainError("Dataset records must be in chronological order.")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    @property
    def labels(self):
        return np.fromiter((r.legitimacy for r in self.records), dtype=np.int64,
                           count=len(self.records))

    @property
    def fake_total(self):
        return int(len(self.records) - self.labels.sum())

    @property
    def legitimate_total(self):
        return int(self.labels.sum())

    def column(self, name):
        if name not in RECORD_FIELDS:
            raise DomainError(f"Unknown task field '{name}'.")
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    def feature_array(self, names=CANDIDATE_FEATURES):
        """n x len(names) float matrix of the requested feature columns."""
        if not self.records:
            return np.empty((0, len(names)), dtype=np.float64)
        return np.column_stack([self.column(name) for name in names])

    def subset(self, indices):
        """Records at the given positions, kept in input order."""
        ordered = sorted(int(i) for i in indices)
        return Dataset(tuple(self.records[i] for i in ordered), origin=self.origin)

    def day_histogram(self):
        histogram = {}
        for record in self.records:
            histogram[record.day] = histogram.get(record.day, 0) + 1
        return dict(sorted(histogram.items()))
