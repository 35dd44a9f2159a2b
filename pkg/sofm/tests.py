import csv
import io
import json

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, DomainError, StateError
from core.files import dump_json
from taskgen.models import Dataset, TaskRecord
from .clustering import (
    assign_clusters, cluster_counts, label_clusters, label_map, partition,
)
from .models import MARK_LEGITIMATE_ONLY, MARK_MIXED, SofmMap, SofmParams
from .serializers import SofmMapSerializer, contingency_to_csv, map_to_payload
from .training import (
    bmu, init_map, lattice_distances, neighbourhood, train_sofm, update_toward,
)


def make_records(labels):
    """Minimal chronological records with the given legitimacy labels."""
    return Dataset(tuple(
        TaskRecord(id=i + 1, day=1 + i // 1440, hour=(i // 60) % 24, minute=i % 60,
                   duration_min=10, battery_pct=5, latitude=48.47, longitude=-81.33,
                   grid_number=0, on_peak=1 if 7 <= (i // 60) % 24 <= 11 else 0,
                   coverage_m=50, legitimacy=int(label))
        for i, label in enumerate(labels)
    ))


def fixed_map(weights, cols=None, marks=None):
    weights = np.asarray(weights, dtype=np.float64)
    cols = cols or weights.shape[0]
    return SofmMap(rows=weights.shape[0] // cols, cols=cols, weights=weights,
                   cluster_marks=marks, trained=True)


def blobs(seed=0, n=40):
    rng = np.random.default_rng(seed)
    near = rng.normal(0.15, 0.03, size=(n, 2))
    far = rng.normal(0.85, 0.03, size=(n, 2))
    return np.vstack([near, far]), np.repeat([1, 0], n)


class SofmParamsTests(SimpleTestCase):
    """Tests for the training schedule."""

    def test_linear_schedule_endpoints(self):
        params = SofmParams(epochs=11)
        self.assertEqual(params.learning_rate(0), 0.5)
        self.assertAlmostEqual(params.learning_rate(10), 0.01)
        self.assertAlmostEqual(params.radius(5), 1.25)
        self.assertAlmostEqual(params.radius(10), 0.5)

    def test_single_epoch_keeps_initial_values(self):
        params = SofmParams(epochs=1)
        self.assertEqual((params.learning_rate(0), params.radius(0)), (0.5, 2.0))

    def test_invalid_values(self):
        for overrides in ({'epochs': 0}, {'alpha0': 0.0}, {'alpha0': 1.5}, {'sigma0': -1.0},
                          {'alpha_min': 0.9}, {'decay': 'exponential'}):
            with self.subTest(overrides=overrides), self.assertRaises(ConfigurationError):
                SofmParams(**overrides)


class InitMapTests(SimpleTestCase):
    """Tests for map initialisation."""

    def test_default_lattice(self):
        sofm_map = init_map(4, 4, 4, 3)
        self.assertEqual(sofm_map.weights.shape, (16, 4))
        self.assertTrue(((sofm_map.weights >= 0) & (sofm_map.weights <= 1)).all())
        self.assertFalse(sofm_map.trained)
        self.assertIsNone(sofm_map.cluster_marks)

    def test_single_neuron(self):
        self.assertEqual(init_map(1, 1, 3, 0).neuron_count, 1)

    def test_seeded(self):
        np.testing.assert_array_equal(init_map(4, 4, 2, 9).weights, init_map(4, 4, 2, 9).weights)

    def test_zero_dimension(self):
        with self.assertRaises(DomainError):
            init_map(0, 4, 4, 1)


class BmuTests(SimpleTestCase):
    """Tests for best matching unit search."""

    def test_single_neuron(self):
        self.assertEqual(bmu(init_map(1, 1, 2, 0), [0.9, 0.1]), 0)

    def test_closest_neuron(self):
        self.assertEqual(bmu(fixed_map([[0, 0], [1, 1]]), [0.1, 0.1]), 0)
        self.assertEqual(bmu(fixed_map([[0, 0], [1, 1]]), [0.8, 0.9]), 1)

    def test_tie_goes_to_lowest_index(self):
        self.assertEqual(bmu(fixed_map([[0, 0], [1, 1]]), [0.5, 0.5]), 0)

    def test_width_mismatch(self):
        with self.assertRaises(DomainError):
            bmu(fixed_map([[0, 0], [1, 1]]), [0.5, 0.5, 0.5])


class NeighbourhoodTests(SimpleTestCase):
    """Tests for the lattice neighbourhood."""

    def test_chebyshev_distances(self):
        distances = lattice_distances(4, 4)
        self.assertEqual(distances[0, 5], 1)
        self.assertEqual(distances[0, 15], 3)
        self.assertEqual(distances[3, 12], 3)
        self.assertTrue((np.diag(distances) == 0).all())

    def test_winner_weight_is_one_and_decreasing(self):
        distances = lattice_distances(4, 4)
        for sigma in (0.5, 1.0, 2.0):
            h = neighbourhood(distances, sigma)
            self.assertTrue((np.diag(h) == 1.0).all())
            by_distance = [h[0][distances[0] == g][0] for g in range(4)]
            self.assertEqual(by_distance, sorted(by_distance, reverse=True))

    def test_update_moves_winner_closer(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            weights = rng.uniform(size=(4, 3))
            sample = rng.uniform(size=3)
            influence = np.zeros(4)
            influence[2] = rng.uniform(0.01, 1.0)
            before = np.linalg.norm(weights[2] - sample)
            update_toward(weights, sample, influence)
            self.assertLess(np.linalg.norm(weights[2] - sample), before)


class TrainSofmTests(SimpleTestCase):
    """Tests for map training."""

    def test_single_neuron_converges_to_repeated_sample(self):
        sample = np.array([0.3, 0.8])
        trained = train_sofm(init_map(1, 1, 2, 0), np.tile(sample, (5, 1)),
                             SofmParams(epochs=100))
        self.assertLess(np.abs(trained.weights[0] - sample).max(), 1e-3)
        self.assertTrue(trained.trained)

    def test_two_neurons_split_two_blobs(self):
        samples, labels = blobs()
        trained = train_sofm(init_map(1, 2, 2, 4), samples, SofmParams(epochs=50, sigma0=1.0,
                                                                       sigma_min=0.1))
        assignment = assign_clusters(trained, samples)
        self.assertEqual(len(set(assignment[labels == 1])), 1)
        self.assertEqual(len(set(assignment[labels == 0])), 1)
        self.assertNotEqual(assignment[0], assignment[-1])

    def test_input_map_untouched(self):
        initial = init_map(2, 2, 2, 1)
        snapshot = initial.weights.copy()
        train_sofm(initial, blobs()[0], SofmParams(epochs=2))
        np.testing.assert_array_equal(initial.weights, snapshot)

    def test_fixed_seed_is_bit_identical(self):
        samples = blobs(2)[0]
        first = train_sofm(init_map(2, 2, 2, 1), samples, SofmParams(epochs=5, rng_seed=3))
        second = train_sofm(init_map(2, 2, 2, 1), samples, SofmParams(epochs=5, rng_seed=3))
        np.testing.assert_array_equal(first.weights, second.weights)

    def test_empty_samples(self):
        with self.assertRaises(DomainError):
            train_sofm(init_map(2, 2, 2, 1), np.empty((0, 2)), SofmParams())


class AssignClustersTests(SimpleTestCase):
    """Tests for cluster assignment."""

    def test_untrained_map_rejected(self):
        with self.assertRaises(StateError):
            assign_clusters(init_map(2, 2, 2, 0), np.zeros((3, 2)))

    def test_empty_input(self):
        self.assertEqual(assign_clusters(fixed_map([[0, 0], [1, 1]]), np.empty((0, 2))).size, 0)

    def test_identical_rows_share_cluster(self):
        assignment = assign_clusters(fixed_map([[0, 0], [1, 1], [0, 1]]),
                                     np.tile([0.2, 0.7], (4, 1)))
        self.assertEqual(len(set(assignment.tolist())), 1)

    def test_matches_bmu(self):
        sofm_map = train_sofm(init_map(3, 3, 2, 5), blobs()[0], SofmParams(epochs=3))
        samples = np.random.default_rng(1).uniform(size=(30, 2))
        self.assertEqual(assign_clusters(sofm_map, samples).tolist(),
                         [bmu(sofm_map, row) for row in samples])


class LabelClustersTests(SimpleTestCase):
    """Tests for cluster marking."""

    def test_pure_mixed_and_empty_clusters(self):
        assignment = np.array([0] * 418 + [1] * 740)
        labels = np.array([1] * 418 + [1] * 640 + [0] * 100)
        marks = label_clusters(assignment, labels, 3)
        self.assertEqual(marks, (MARK_LEGITIMATE_ONLY, MARK_MIXED, MARK_MIXED))

    def test_threshold_below_one(self):
        assignment = np.zeros(20, dtype=int)
        labels = np.array([1] * 19 + [0])
        self.assertEqual(label_clusters(assignment, labels, 1, purity_threshold=0.95),
                         (MARK_LEGITIMATE_ONLY,))
        self.assertEqual(label_clusters(assignment, labels, 1), (MARK_MIXED,))

    def test_threshold_range(self):
        with self.assertRaises(ConfigurationError):
            label_clusters(np.zeros(2, dtype=int), [1, 1], 1, purity_threshold=0.5)

    def test_counts(self):
        counts = cluster_counts([0, 0, 2, 2, 2], [1, 0, 1, 1, 0], 3)
        self.assertEqual(counts.tolist(), [[1, 1], [0, 0], [2, 1]])


class PartitionTests(SimpleTestCase):
    """Tests for the PrecL / mixed split."""

    def test_unlabeled_map_rejected(self):
        dataset = make_records([1, 0])
        with self.assertRaises(StateError):
            partition(fixed_map([[0.0], [1.0]]), dataset, np.array([[0.0], [1.0]]))

    def test_all_mixed_map_keeps_everything_mixed(self):
        dataset = make_records([1, 0, 1])
        sofm_map = fixed_map([[0.0], [1.0]], marks=(MARK_MIXED, MARK_MIXED))
        result = partition(sofm_map, dataset, np.array([[0.1], [0.9], [0.4]]))
        self.assertEqual(len(result.legitimate_only), 0)
        self.assertEqual(result.mixed.records, dataset.records)

    def test_reconstructs_randomized_inputs(self):
        rng = np.random.default_rng(2024)
        for trial in range(100):
            n = int(rng.integers(0, 40))
            d = int(rng.integers(1, 4))
            rows, cols = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            dataset = make_records(rng.integers(0, 2, size=n))
            samples = rng.uniform(size=(n, d))
            marks = tuple(MARK_LEGITIMATE_ONLY if flag else MARK_MIXED
                          for flag in rng.integers(0, 2, size=rows * cols))
            sofm_map = SofmMap(rows=rows, cols=cols, weights=rng.uniform(size=(rows * cols, d)),
                               cluster_marks=marks, trained=True)
            result = partition(sofm_map, dataset, samples)
            with self.subTest(trial=trial):
                self.assertEqual(len(result.legitimate_only) + len(result.mixed), n)
                self.assertFalse(set(result.legitimate_indices) & set(result.mixed_indices))
                self.assertEqual(result.reconstruct().records, dataset.records)

    def test_training_precl_has_no_fakes(self):
        samples, labels = blobs(3)
        labels = labels.copy()
        labels[5] = 0
        dataset = make_records(labels)
        trained = train_sofm(init_map(2, 2, 2, 1), samples, SofmParams(epochs=20))
        labeled = label_map(trained, samples, labels)
        result = partition(labeled, dataset, samples)
        self.assertEqual(result.precl_fakes, 0)
        self.assertTrue(all(record.legitimacy == 1 for record in result.legitimate_only))

    def test_fake_shares(self):
        dataset = make_records([1, 1, 0, 1])
        sofm_map = fixed_map([[0.0], [1.0]], marks=(MARK_LEGITIMATE_ONLY, MARK_MIXED))
        result = partition(sofm_map, dataset, np.array([[0.0], [0.0], [1.0], [1.0]]))
        shares = result.fake_shares(dataset)
        self.assertEqual(shares, {'full': 0.25, 'mixed': 0.5, 'legitimate_only': 0.0})


class SofmSerializerTests(SimpleTestCase):
    """Tests for map JSON and the contingency table."""

    def test_round_trip_is_byte_identical(self):
        samples, labels = blobs(4)
        trained = train_sofm(init_map(4, 4, 2, 2), samples, SofmParams(epochs=3))
        labeled = label_map(trained, samples, labels)
        labeled.feature_names = ('latitude', 'longitude')
        text = dump_json(map_to_payload(labeled))

        serializer = SofmMapSerializer(data=json.loads(text))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        restored = serializer.to_map()
        np.testing.assert_array_equal(restored.weights, labeled.weights)
        self.assertEqual(len(restored.cluster_marks), 16)
        self.assertEqual(dump_json(map_to_payload(restored)), text)

    def test_rejects_wrong_mark_count(self):
        payload = map_to_payload(fixed_map([[0.0], [1.0]], marks=(MARK_MIXED, MARK_MIXED)))
        payload['cluster_marks'] = [MARK_MIXED]
        serializer = SofmMapSerializer(data=payload)
        self.assertFalse(serializer.is_valid())
        self.assertIn('cluster_marks', serializer.errors)

    def test_contingency_layout(self):
        sofm_map = fixed_map([[0.0], [1.0]], marks=(MARK_LEGITIMATE_ONLY, MARK_MIXED))
        train_counts = np.array([[418, 0], [640, 100]])
        test_counts = np.array([[120, 1], [300, 40]])
        rows = list(csv.reader(io.StringIO(contingency_to_csv(sofm_map, train_counts,
                                                               test_counts))))
        self.assertEqual(rows[0][:2], ['cluster', 'mark'])
        self.assertEqual(rows[1], ['1', MARK_LEGITIMATE_ONLY, '418', '0', '120', '1'])
        self.assertEqual(rows[3], ['precl', MARK_LEGITIMATE_ONLY, '418', '0', '120', '1'])
        self.assertEqual(rows[4], ['mixed', MARK_MIXED, '640', '100', '300', '40'])
