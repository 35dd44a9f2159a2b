"""
Synthetic crowdsensing campaign generation.

Legitimate and fake tasks follow the per-class probabilities of the
simulation settings:

    hour      fake 80% 7-11, 20% 12-17     legitimate 8% 0-5, 92% 6-23
    duration  fake 70% {40,50,60}          legitimate uniform {10..60}
    battery   fake 80% 7-10, 20% 1-6       legitimate uniform 1-10

Fake tasks are placed inside attack zones, legitimate ones anywhere in the
bounding box. Minute and coverage carry no class signal.
"""

import logging
import math
from dataclasses import replace
from decimal import Decimal

import numpy as np

from core.exceptions import ConfigurationError, DomainError
from core.logging import log_stage_activity
from .models import (
    COVERAGE_CHOICES, DURATION_CHOICES, FAKE, LEGITIMATE, ORIGIN_GENERATED,
    AttackZone, Dataset, TaskRecord, compute_on_peak,
)
from .geo import METERS_PER_DEGREE, destination_point

logger = logging.getLogger('fakeguard.taskgen')

COORDINATE_DECIMALS = 6
# 6-decimal rounding moves a point by at most ~0.14 m
ROUNDING_MARGIN_M = 0.2
# one rounding step, in degrees
ROUNDING_MARGIN_DEG = 10.0 ** -COORDINATE_DECIMALS

LEGITIMATE_NIGHT_SHARE = 0.08
FAKE_PEAK_SHARE = 0.80
FAKE_LONG_DURATION_SHARE = 0.70
FAKE_HIGH_BATTERY_SHARE = 0.80


def _choice(rng, values):
    return values[int(rng.integers(len(values)))]


def _uniform_int(rng, low, high):
    """Uniform integer in [low, high]."""
    return int(rng.integers(low, high + 1))


def assign_grid(latitude, longitude, config):
    """Row-major index of the grid cell containing a point of the bounding box."""
    return config.grid().cell_index(latitude, longitude)


def _inner_uniform(rng, low, high):
    """Uniform coordinate that stays inside [low, high] after rounding."""
    margin = min(ROUNDING_MARGIN_DEG, (high - low) / 4)
    return float(rng.uniform(low + margin, high - margin))


def _finish_record(rng, grid, task_id, day, hour, duration, battery,
                   latitude, longitude, legitimacy):
    latitude = round(latitude, COORDINATE_DECIMALS)
    longitude = round(longitude, COORDINATE_DECIMALS)
    return TaskRecord(
        id=task_id,
        day=day,
        hour=hour,
        minute=_uniform_int(rng, 0, 59),
        duration_min=duration,
        battery_pct=battery,
        latitude=latitude,
        longitude=longitude,
        grid_number=grid.cell_index(latitude, longitude),
        on_peak=compute_on_peak(hour),
        coverage_m=_choice(rng, COVERAGE_CHOICES),
        legitimacy=legitimacy,
    )


def sample_legitimate_task(rng, config, task_id=0, grid=None):
    """Draw one legitimate task from the legitimate-class distributions."""
    grid = grid or config.grid()
    lat_min, lat_max, lon_min, lon_max = config.bounding_box

    day = _uniform_int(rng, 1, config.num_days)
    if rng.random() < LEGITIMATE_NIGHT_SHARE:
        hour = _uniform_int(rng, 0, 5)
    else:
        hour = _uniform_int(rng, 6, 23)
    duration = _choice(rng, DURATION_CHOICES)
    battery = _uniform_int(rng, 1, 10)
    latitude = _inner_uniform(rng, lat_min, lat_max)
    longitude = _inner_uniform(rng, lon_min, lon_max)

    return _finish_record(rng, grid, task_id, day, hour, duration, battery,
                          latitude, longitude, LEGITIMATE)


def sample_fake_task(rng, config, task_id=0, grid=None):
    """Draw one fake task located inside a uniformly chosen attack zone."""
    if not config.attack_zones:
        raise ConfigurationError("fake tasks need at least one attack zone.",
                                 details={'field': 'attack_zones'})
    grid = grid or config.grid()

    day = _uniform_int(rng, 1, config.num_days)
    if rng.random() < FAKE_PEAK_SHARE:
        hour = _uniform_int(rng, 7, 11)
    else:
        hour = _uniform_int(rng, 12, 17)
    if rng.random() < FAKE_LONG_DURATION_SHARE:
        duration = _choice(rng, DURATION_CHOICES[3:])
    else:
        duration = _choice(rng, DURATION_CHOICES[:3])
    if rng.random() < FAKE_HIGH_BATTERY_SHARE:
        battery = _uniform_int(rng, 7, 10)
    else:
        battery = _uniform_int(rng, 1, 6)

    zone = config.attack_zones[int(rng.integers(len(config.attack_zones)))]
    usable_radius = max(zone.radius_m - ROUNDING_MARGIN_M, 0.0)
    # sqrt keeps the point density uniform over the disc
    distance = usable_radius * math.sqrt(rng.random())
    bearing = rng.uniform(0.0, 2.0 * math.pi)
    latitude, longitude = destination_point(zone.center_lat, zone.center_lon,
                                            bearing, distance)

    return _finish_record(rng, grid, task_id, day, hour, duration, battery,
                          latitude, longitude, FAKE)


def random_attack_zones(bounding_box, count, radius_m=200.0, rng_seed=0):
    """
    Attack zones with centres drawn uniformly inside the box, far enough from
    its edges for the whole disc to fit.
    """
    if count < 0:
        raise ConfigurationError("attack zone count must be non-negative.",
                                 details={'field': 'attack_zone_count'})
    lat_min, lat_max, lon_min, lon_max = bounding_box
    rng = np.random.default_rng(rng_seed)
    # twice the radius keeps the disc clear of the box at any latitude
    margin_lat = 2 * radius_m / METERS_PER_DEGREE
    margin_lon = 2 * radius_m / (METERS_PER_DEGREE * math.cos(math.radians(max(abs(lat_min), abs(lat_max)))))
    if lat_max - lat_min <= 2 * margin_lat or lon_max - lon_min <= 2 * margin_lon:
        raise ConfigurationError("bounding box too small for the attack zone radius.",
                                 details={'field': 'bounding_box'})
    zones = []
    for _ in range(count):
        zones.append(AttackZone(
            center_lat=round(float(rng.uniform(lat_min + margin_lat, lat_max - margin_lat)), 6),
            center_lon=round(float(rng.uniform(lon_min + margin_lon, lon_max - margin_lon)), 6),
            radius_m=radius_m,
        ))
    return tuple(zones)


def generate_campaign(config):
    """
    Generate a complete campaign: exact class counts, chronological order,
    ids 1..n assigned after sorting.
    """
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    grid = config.grid()

    records = [sample_legitimate_task(rng, config, grid=grid)
               for _ in range(config.legitimate_count)]
    records.extend(sample_fake_task(rng, config, grid=grid)
                   for _ in range(config.fake_count))

    # shuffle first so that same-minute ties do not group by class
    order = rng.permutation(len(records))
    shuffled = [records[i] for i in order]
    shuffled.sort(key=lambda record: record.chronological_key)
    renumbered = tuple(
        replace(record, id=index)
        for index, record in enumerate(shuffled, start=1)
    )

    dataset = Dataset(renumbered, origin=ORIGIN_GENERATED)
    log_stage_activity('generate', 'campaign generated', details={
        'total': len(dataset),
        'fake': dataset.fake_total,
        'seed': int(config.rng_seed),
    })
    return dataset


def split_temporal(dataset, train_fraction):
    """First floor(n * fraction) records train, the remainder tests."""
    if len(dataset) == 0:
        raise DomainError("cannot split an empty dataset.")
    if not 0 < train_fraction < 1:
        raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}.")
    # decimal product so that e.g. 100 * 0.29 cuts at 29, not 28
    cut = int(Decimal(repr(float(train_fraction))) * len(dataset))
    train = Dataset(dataset.records[:cut], origin=dataset.origin)
    test = Dataset(dataset.records[cut:], origin=dataset.origin)
    return train, test
