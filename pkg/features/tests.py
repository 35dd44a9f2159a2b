import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DomainError
from deepnn.models import TrainParams
from .models import FeatureMatrix, FeatureRanking
from .relieff import relieff
from .scaling import fit_scaler, inverse_transform, transform
from .selection import (
    holdout_evaluator, select_top_k, sequential_forward_select,
)
from .serializers import FeatureRankingSerializer


def random_matrix(n=20, d=4, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    names = tuple(f'f{i}' for i in range(d))
    return FeatureMatrix(rng.uniform(0.0, 1.0, size=(n, d)), names, labels)


def brute_force_relieff(rows, labels, k):
    """All-instances ReliefF written with plain loops."""
    n, d = len(rows), len(rows[0])
    lows = [min(rows[i][f] for i in range(n)) for f in range(d)]
    highs = [max(rows[i][f] for i in range(n)) for f in range(d)]

    def diff(f, a, b):
        span = highs[f] - lows[f]
        return 0.0 if span == 0 else abs(rows[a][f] - rows[b][f]) / span

    def distance(a, b):
        return sum(diff(f, a, b) ** 2 for f in range(d))

    weights = [0.0] * d
    for i in range(n):
        others = sorted((distance(i, j), j) for j in range(n) if j != i)
        hits = [j for _, j in others if labels[j] == labels[i]][:k]
        misses = [j for _, j in others if labels[j] != labels[i]][:k]
        for f in range(d):
            weights[f] -= sum(diff(f, i, j) for j in hits) / (n * len(hits))
            weights[f] += sum(diff(f, i, j) for j in misses) / (n * len(misses))
    return np.array(weights)


class ScalerTests(SimpleTestCase):
    """Tests for min-max scaling."""

    def test_records_column_range(self):
        matrix = FeatureMatrix(np.array([[0.0], [5.0], [10.0]]), ('a',), [0, 1, 0])
        scaler = fit_scaler(matrix)
        self.assertEqual((scaler.minimums[0], scaler.maximums[0]), (0.0, 10.0))

    def test_single_row_maps_to_zero(self):
        matrix = FeatureMatrix(np.array([[3.0, -2.0, 7.5]]), ('a', 'b', 'c'), [1])
        scaled = transform(fit_scaler(matrix), matrix)
        self.assertTrue((scaled.rows == 0).all())

    def test_output_inside_unit_interval(self):
        rng = np.random.default_rng(4)
        train = FeatureMatrix(rng.normal(size=(100, 4)), tuple('abcd'), np.arange(100) % 2)
        other = FeatureMatrix(rng.normal(scale=3.0, size=(100, 4)), tuple('abcd'),
                              np.arange(100) % 2)
        scaler = fit_scaler(train)
        for matrix in (train, other):
            rows = transform(scaler, matrix).rows
            self.assertTrue(((rows >= 0) & (rows <= 1)).all())

    def test_inverse_round_trip(self):
        matrix = random_matrix(30, 3, seed=5)
        scaler = fit_scaler(matrix)
        restored = inverse_transform(scaler, transform(scaler, matrix))
        np.testing.assert_allclose(restored.rows, matrix.rows, atol=1e-9)

    def test_empty_and_mismatch(self):
        with self.assertRaises(DomainError):
            fit_scaler(FeatureMatrix(np.empty((0, 2)), ('a', 'b'), []))
        scaler = fit_scaler(random_matrix(d=3))
        with self.assertRaises(DomainError):
            transform(scaler, random_matrix(d=4))


class ReliefFTests(SimpleTestCase):
    """Tests for ReliefF weighting."""

    def test_matches_brute_force(self):
        matrix = random_matrix(20, 4, seed=9)
        ranking = relieff(matrix, k_neighbors=3)
        expected = brute_force_relieff(matrix.rows.tolist(), matrix.labels.tolist(), 3)
        np.testing.assert_allclose(ranking.weights, expected, rtol=0, atol=1e-10)

    def test_neighbour_shortfall_uses_available(self):
        matrix = random_matrix(12, 3, seed=2)
        ranking = relieff(matrix, k_neighbors=50)
        expected = brute_force_relieff(matrix.rows.tolist(), matrix.labels.tolist(), 50)
        np.testing.assert_allclose(ranking.weights, expected, rtol=0, atol=1e-10)

    def test_constant_feature_weight_is_zero(self):
        matrix = random_matrix(20, 3, seed=1)
        rows = matrix.rows.copy()
        rows[:, 1] = 0.25
        ranking = relieff(FeatureMatrix(rows, matrix.feature_names, matrix.labels))
        self.assertEqual(ranking.weights[1], 0.0)

    def test_separating_feature_outranks_noise(self):
        rng = np.random.default_rng(6)
        labels = np.arange(20) % 2
        separating = labels + rng.uniform(-0.1, 0.1, 20)
        matrix = FeatureMatrix(np.column_stack([separating, rng.uniform(size=20)]),
                               ('signal', 'noise'), labels)
        ranking = relieff(matrix, k_neighbors=3)
        self.assertGreater(ranking.weights[0], ranking.weights[1])
        self.assertEqual(ranking.order, (0, 1))

    def test_weights_bounded(self):
        for seed in range(5):
            weights = relieff(random_matrix(40, 5, seed=seed), k_neighbors=4).weights
            self.assertTrue(((weights >= -1) & (weights <= 1)).all())

    def test_row_order_does_not_matter(self):
        matrix = random_matrix(50, 4, seed=3)
        permutation = np.random.default_rng(0).permutation(50)
        shuffled = matrix.select_rows(permutation)
        np.testing.assert_allclose(relieff(matrix, 5).weights, relieff(shuffled, 5).weights,
                                   rtol=0, atol=1e-12)

    def test_thread_pool_gives_identical_weights(self):
        matrix = random_matrix(100, 4, seed=8)
        np.testing.assert_array_equal(relieff(matrix, 5).weights,
                                      relieff(matrix, 5, workers=4).weights)

    def test_constant_duplicate_leaves_other_weights(self):
        matrix = random_matrix(30, 3, seed=12)
        widened = FeatureMatrix(np.column_stack([matrix.rows, np.full(30, 2.0)]),
                                matrix.feature_names + ('dup',), matrix.labels)
        np.testing.assert_allclose(relieff(widened, 4).weights[:3], relieff(matrix, 4).weights,
                                   rtol=0, atol=1e-12)

    def test_duplicated_informative_column(self):
        rng = np.random.default_rng(4)
        labels = np.arange(30) % 2
        signal = labels + rng.uniform(-0.3, 0.3, 30)
        rows = np.column_stack([signal, rng.uniform(size=(30, 2))])
        matrix = FeatureMatrix(rows, ('signal', 'a', 'b'), labels)
        widened = FeatureMatrix(np.column_stack([rows, signal]),
                                ('signal', 'a', 'b', 'signal_copy'), labels)

        # every hit and miss is a neighbour, so distances cannot reorder them
        base = relieff(matrix, k_neighbors=30).weights
        doubled = relieff(widened, k_neighbors=30).weights
        np.testing.assert_allclose(doubled[:3], base, rtol=0, atol=1e-12)
        self.assertAlmostEqual(doubled[3], doubled[0], delta=1e-12)

        # the copy always ties with its source
        weights = relieff(widened, k_neighbors=4).weights
        self.assertAlmostEqual(weights[3], weights[0], delta=1e-12)
        self.assertGreater(weights[0], max(weights[1], weights[2]))

    def test_sampling_is_seeded(self):
        matrix = random_matrix(60, 4, seed=1)
        first = relieff(matrix, 5, sample_count=20, rng_seed=3)
        second = relieff(matrix, 5, sample_count=20, rng_seed=3)
        np.testing.assert_array_equal(first.weights, second.weights)

    def test_single_class_rejected(self):
        matrix = random_matrix(10, 2)
        with self.assertRaises(DomainError):
            relieff(FeatureMatrix(matrix.rows, matrix.feature_names, np.ones(10, dtype=int)))

    def test_ties_ordered_by_index(self):
        ranking = FeatureRanking.from_weights([0.1, 0.3, 0.1, 0.3])
        self.assertEqual(ranking.order, (1, 3, 0, 2))


class SelectTopKTests(SimpleTestCase):
    """Tests for top-k selection."""

    def setUp(self):
        self.ranking = FeatureRanking.from_weights([0.05, 0.4, -0.1, 0.2, 0.3])

    def test_prefixes(self):
        for k in range(1, 5):
            self.assertEqual(select_top_k(self.ranking, k),
                             select_top_k(self.ranking, k + 1)[:k])

    def test_extremes(self):
        self.assertEqual(select_top_k(self.ranking, 1), [1])
        self.assertEqual(select_top_k(self.ranking, 5), [1, 4, 3, 0, 2])

    def test_out_of_range(self):
        for k in (0, 6):
            with self.subTest(k=k), self.assertRaises(DomainError):
                select_top_k(self.ranking, k)


class SequentialForwardSelectTests(SimpleTestCase):
    """Tests for the greedy forward pass."""

    def setUp(self):
        self.matrix = random_matrix(40, 6, seed=2)
        self.ranking = FeatureRanking.from_weights([0.6, 0.5, 0.4, 0.3, 0.2, 0.1])

    def test_constant_evaluator_keeps_first(self):
        chosen = sequential_forward_select(self.matrix, self.ranking, 6, lambda subset: 0.7)
        self.assertEqual(chosen, [0])

    def test_stops_when_gain_ends(self):
        chosen = sequential_forward_select(self.matrix, self.ranking, 6,
                                           lambda subset: 0.1 * min(len(subset), 4))
        self.assertEqual(chosen, [0, 1, 2, 3])

    def test_respects_k_max(self):
        chosen = sequential_forward_select(self.matrix, self.ranking, 2,
                                           lambda subset: float(len(subset)))
        self.assertEqual(chosen, [0, 1])

    def test_network_evaluator_is_reproducible(self):
        rng = np.random.default_rng(5)
        labels = np.arange(80) % 2
        rows = np.column_stack([labels * 0.8 + rng.uniform(0, 0.2, 80),
                                rng.uniform(size=80), rng.uniform(size=80)])
        matrix = FeatureMatrix(rows, ('signal', 'a', 'b'), labels)
        ranking = relieff(matrix, 5)
        params = TrainParams(epochs=10, patience=5, rng_seed=1)
        first = sequential_forward_select(matrix, ranking, 3,
                                          holdout_evaluator(matrix, params=params))
        second = sequential_forward_select(matrix, ranking, 3,
                                           holdout_evaluator(matrix, params=params))
        self.assertEqual(first, second)
        self.assertEqual(first[0], 0)


class FeatureRankingSerializerTests(SimpleTestCase):
    """Tests for ranking.json validation."""

    def test_valid_report(self):
        ranking = FeatureRanking.from_weights([0.1, -0.2, 0.3], ('a', 'b', 'c'))
        serializer = FeatureRankingSerializer(data=ranking.as_report([2, 0]))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.to_ranking().order, (2, 0, 1))

    def test_order_must_be_permutation(self):
        serializer = FeatureRankingSerializer(data={
            'weights': [0.1, 0.2], 'order': [0, 0], 'selected': [0],
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('order', serializer.errors)
