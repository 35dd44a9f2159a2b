import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ArtifactParseError, ConfigurationError, DomainError
from .generator import (
    assign_grid, generate_campaign, random_attack_zones, sample_fake_task,
    sample_legitimate_task, split_temporal,
)
from .geo import METERS_PER_DEGREE, haversine_m
from .models import (
    DEFAULT_BOUNDING_BOX, AttackZone, Dataset, GenerationConfig, TaskRecord,
    compute_on_peak,
)
from .serializers import dataset_to_csv, parse_dataset_csv

SAMPLES = 10_000


def zoned_config(**overrides):
    zones = random_attack_zones(DEFAULT_BOUNDING_BOX, 5, 200.0, rng_seed=3)
    values = {'attack_zones': zones, 'rng_seed': 42}
    values.update(overrides)
    return GenerationConfig(**values)


class OnPeakTests(SimpleTestCase):
    """Tests for the on-peak flag."""

    def test_busy_window_inclusive(self):
        """Exactly hours 7 to 11 are on-peak."""
        flags = [compute_on_peak(hour) for hour in range(24)]
        self.assertEqual([h for h, flag in enumerate(flags) if flag], [7, 8, 9, 10, 11])
        self.assertEqual(compute_on_peak(8), 1)
        self.assertEqual(compute_on_peak(0), 0)
        self.assertEqual(compute_on_peak(11), 1)

    def test_rejects_invalid_hour(self):
        with self.assertRaises(DomainError):
            compute_on_peak(24)


class AssignGridTests(SimpleTestCase):
    """Tests for grid number assignment."""

    def setUp(self):
        self.config = zoned_config()
        self.grid = self.config.grid()

    def test_origin_cell(self):
        lat_min, _, lon_min, _ = self.config.bounding_box
        self.assertEqual(assign_grid(lat_min, lon_min, self.config), 0)

    def test_last_cell(self):
        _, lat_max, _, lon_max = self.config.bounding_box
        self.assertEqual(assign_grid(lat_max, lon_max, self.config), self.grid.cell_count - 1)

    def test_midpoint_matches_cell_walk(self):
        """The midpoint lands in the cell found by walking rows and columns."""
        lat_min, lat_max, lon_min, lon_max = self.config.bounding_box
        lat, lon = (lat_min + lat_max) / 2, (lon_min + lon_max) / 2
        mid = math.radians(lat)
        north = (lat - lat_min) * METERS_PER_DEGREE
        east = (lon - lon_min) * METERS_PER_DEGREE * math.cos(mid)
        row = 0
        while (row + 1) * 1000.0 <= north:
            row += 1
        col = 0
        while (col + 1) * 1000.0 <= east:
            col += 1
        self.assertEqual(assign_grid(lat, lon, self.config), row * self.grid.cols + col)

    def test_ten_kilometre_box_has_hundred_cells(self):
        self.assertEqual((self.grid.rows, self.grid.cols), (10, 10))

    def test_stable_for_identical_input(self):
        self.assertEqual(assign_grid(48.47, -81.33, self.config),
                         assign_grid(48.47, -81.33, self.config))

    def test_out_of_box_rejected(self):
        with self.assertRaises(DomainError):
            assign_grid(0.0, 0.0, self.config)


class SampleLegitimateTaskTests(SimpleTestCase):
    """Distribution checks for legitimate tasks."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = zoned_config()
        rng = np.random.default_rng(11)
        cls.samples = [sample_legitimate_task(rng, cls.config) for _ in range(SAMPLES)]

    def test_night_share(self):
        share = sum(task.hour <= 5 for task in self.samples) / SAMPLES
        self.assertAlmostEqual(share, 0.08, delta=0.01)

    def test_always_legitimate(self):
        self.assertTrue(all(task.legitimacy == 1 for task in self.samples))

    def test_duration_uniform(self):
        for value in (10, 20, 30, 40, 50, 60):
            share = sum(task.duration_min == value for task in self.samples) / SAMPLES
            self.assertAlmostEqual(share, 1 / 6, delta=0.02)

    def test_battery_uniform(self):
        for value in range(1, 11):
            share = sum(task.battery_pct == value for task in self.samples) / SAMPLES
            self.assertAlmostEqual(share, 0.1, delta=0.02)

    def test_inside_bounding_box(self):
        grid = self.config.grid()
        self.assertTrue(all(grid.contains(t.latitude, t.longitude) for t in self.samples))

    def test_off_lattice_box_keeps_rounded_points_inside(self):
        """Edges between 6-decimal steps: rounding must not leave the box."""
        config = GenerationConfig(
            bounding_box=(41.8800004, 41.8800104, 12.4800004, 12.4800104))
        grid = config.grid()
        rng = np.random.default_rng(5)
        tasks = [sample_legitimate_task(rng, config, grid=grid) for _ in range(5000)]
        self.assertTrue(all(grid.contains(t.latitude, t.longitude) for t in tasks))
        self.assertEqual({t.grid_number for t in tasks}, {0})


class SampleFakeTaskTests(SimpleTestCase):
    """Distribution checks for fake tasks."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = zoned_config()
        rng = np.random.default_rng(12)
        cls.samples = [sample_fake_task(rng, cls.config) for _ in range(SAMPLES)]

    def test_high_battery_share(self):
        share = sum(7 <= task.battery_pct <= 10 for task in self.samples) / SAMPLES
        self.assertAlmostEqual(share, 0.80, delta=0.02)

    def test_hour_bands(self):
        peak = sum(7 <= task.hour <= 11 for task in self.samples) / SAMPLES
        afternoon = sum(12 <= task.hour <= 17 for task in self.samples) / SAMPLES
        self.assertAlmostEqual(peak, 0.80, delta=0.02)
        self.assertAlmostEqual(afternoon, 0.20, delta=0.02)
        self.assertAlmostEqual(peak + afternoon, 1.0)

    def test_long_duration_share(self):
        share = sum(task.duration_min in (40, 50, 60) for task in self.samples) / SAMPLES
        self.assertAlmostEqual(share, 0.70, delta=0.02)

    def test_inside_some_attack_zone(self):
        """Every fake task lies within 200 m of an attack zone centre."""
        for task in self.samples:
            nearest = min(haversine_m(task.latitude, task.longitude, z.center_lat, z.center_lon)
                          for z in self.config.attack_zones)
            self.assertLessEqual(nearest, 200.0)

    def test_always_fake(self):
        self.assertTrue(all(task.legitimacy == 0 for task in self.samples))

    def test_requires_attack_zone(self):
        with self.assertRaises(ConfigurationError):
            sample_fake_task(np.random.default_rng(0), GenerationConfig())


class GenerateCampaignTests(SimpleTestCase):
    """Tests for full campaign generation."""

    def test_exact_counts(self):
        dataset = generate_campaign(zoned_config(total_tasks=2000, fake_fraction=0.124))
        self.assertEqual(len(dataset), 2000)
        self.assertEqual(dataset.fake_total, 248)

    def test_long_duration_share_over_campaign(self):
        """Counting the generated fakes reproduces the 70% long-duration band."""
        dataset = generate_campaign(zoned_config(total_tasks=10_000, fake_fraction=0.5))
        fakes = [r for r in dataset if r.legitimacy == 0]
        share = sum(r.duration_min >= 40 for r in fakes) / len(fakes)
        self.assertAlmostEqual(share, 0.70, delta=0.02)

    def test_chronological_and_renumbered(self):
        dataset = generate_campaign(zoned_config(total_tasks=500))
        keys = [r.chronological_key for r in dataset]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual([r.id for r in dataset], list(range(1, 501)))

    def test_deterministic_for_seed(self):
        first = generate_campaign(zoned_config(total_tasks=300, rng_seed=5))
        second = generate_campaign(zoned_config(total_tasks=300, rng_seed=5))
        self.assertEqual(first.records, second.records)

    def test_days_within_campaign(self):
        dataset = generate_campaign(zoned_config(total_tasks=600))
        self.assertEqual(set(dataset.day_histogram()), {1, 2, 3, 4, 5, 6})

    def test_empty_campaign_rejected(self):
        with self.assertRaises(ConfigurationError):
            generate_campaign(zoned_config(total_tasks=0))

    def test_fakes_without_zones_rejected(self):
        with self.assertRaises(ConfigurationError):
            generate_campaign(GenerationConfig(total_tasks=100))

    def test_zero_fake_fraction_rejected(self):
        with self.assertRaises(ConfigurationError):
            generate_campaign(zoned_config(fake_fraction=0.0))

    def test_zone_outside_box_rejected(self):
        config = zoned_config(attack_zones=(AttackZone(0.0, 0.0, 200.0),))
        with self.assertRaises(ConfigurationError):
            generate_campaign(config)

    def test_zone_radius_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            AttackZone(48.47, -81.33, 0.0)


class SplitTemporalTests(SimpleTestCase):
    """Tests for the chronological train/test split."""

    def _dataset(self, size):
        return Dataset(tuple(
            TaskRecord(id=i, day=1 + i // 60, hour=8, minute=i % 60, duration_min=10, battery_pct=1,
                       latitude=48.47, longitude=-81.33, grid_number=0, on_peak=1,
                       coverage_m=50, legitimacy=1)
            for i in range(size)
        ))

    def test_full_size_split(self):
        train, test = split_temporal(self._dataset(14306), 0.8)
        self.assertEqual((len(train), len(test)), (11444, 2862))

    def test_cut_is_exact_for_decimal_fractions(self):
        for size, fraction, cut in ((100, 0.29, 29), (100, 0.57, 57), (1000, 0.7, 700)):
            train, test = split_temporal(self._dataset(size), fraction)
            self.assertEqual((len(train), len(test)), (cut, size - cut))

    def test_half_split_preserves_order(self):
        dataset = self._dataset(10)
        train, test = split_temporal(dataset, 0.5)
        self.assertEqual([r.id for r in train], [0, 1, 2, 3, 4])
        self.assertEqual([r.id for r in test], [5, 6, 7, 8, 9])
        self.assertEqual(train.records + test.records, dataset.records)

    def test_empty_dataset_rejected(self):
        with self.assertRaises(DomainError):
            split_temporal(Dataset(()), 0.8)

    def test_fraction_bounds(self):
        with self.assertRaises(DomainError):
            split_temporal(self._dataset(4), 1.0)


class DatasetCsvTests(SimpleTestCase):
    """Tests for the dataset CSV format."""

    def setUp(self):
        self.dataset = generate_campaign(zoned_config(total_tasks=120))

    def test_header_and_rows(self):
        lines = dataset_to_csv(self.dataset).split('\n')
        self.assertEqual(lines[0], 'id,day,hour,minute,duration_min,battery_pct,latitude,'
                                   'longitude,grid_number,on_peak,coverage_m,legitimacy')
        self.assertEqual(len([line for line in lines[1:] if line]), 120)
        self.assertEqual(len(lines[1].split(',')[6].split('.')[1]), 6)

    def test_reload_gives_same_records(self):
        text = dataset_to_csv(self.dataset)
        loaded = parse_dataset_csv(text)
        self.assertEqual(loaded.records, self.dataset.records)
        self.assertEqual(dataset_to_csv(loaded), text)

    def test_empty_text_rejected(self):
        with self.assertRaises(ArtifactParseError):
            parse_dataset_csv('')

    def test_bad_field_named(self):
        lines = dataset_to_csv(self.dataset).split('\n')
        cells = lines[1].split(',')
        cells[5] = '42'
        lines[1] = ','.join(cells)
        with self.assertRaises(ArtifactParseError) as ctx:
            parse_dataset_csv('\n'.join(lines))
        self.assertEqual(ctx.exception.field, 'battery_pct')
