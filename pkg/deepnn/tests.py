import json

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, DomainError, TrainingError
from core.files import dump_json
from .models import MlpNetwork, TrainingTrace, TrainParams
from .network import (
    backward, forward, forward_batch, gradient_check, init_network, mean_loss,
    predict, sigmoid, train,
)
from .serializers import NetworkSerializer, network_to_payload
from .services import RunOutcome, TrainingService


def separable_set(n=100, seed=0):
    """Two classes split by a 0.2 gap on the first feature; the second is noise."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    first = np.where(labels == 1, rng.uniform(0.6, 1.0, n), rng.uniform(0.0, 0.4, n))
    samples = np.column_stack([first, rng.uniform(0.0, 1.0, n)])
    return samples, labels


def zero_network(d, hidden_layers=(3, 3)):
    network = init_network(d, 0, hidden_layers=hidden_layers)
    for array in network.weights + network.biases:
        array[...] = 0.0
    return network


class InitNetworkTests(SimpleTestCase):
    """Tests for network initialisation."""

    def test_default_layer_shapes(self):
        network = init_network(4, 11)
        self.assertEqual(network.layer_sizes, (4, 15, 15, 15, 15, 1))
        self.assertEqual([w.shape for w in network.weights],
                         [(4, 15), (15, 15), (15, 15), (15, 15), (15, 1)])
        self.assertTrue(all(not b.any() for b in network.biases))

    def test_weights_within_glorot_limit(self):
        network = init_network(4, 11)
        for w in network.weights:
            limit = np.sqrt(6.0 / (w.shape[0] + w.shape[1]))
            self.assertLessEqual(np.abs(w).max(), limit)

    def test_same_seed_same_network(self):
        self.assertTrue(init_network(4, 5).same_parameters(init_network(4, 5)))

    def test_different_seeds_differ(self):
        self.assertFalse(np.array_equal(init_network(4, 5).weights[0],
                                        init_network(4, 6).weights[0]))

    def test_zero_inputs_rejected(self):
        with self.assertRaises(DomainError):
            init_network(0, 1)


class ForwardTests(SimpleTestCase):
    """Tests for the forward pass."""

    def test_zero_network_outputs_half(self):
        self.assertEqual(forward(zero_network(4), np.ones(4)), 0.5)

    def test_micro_network_closed_form(self):
        network = init_network(1, 0, hidden_layers=(1, 1))
        network.weights = [np.array([[0.5]]), np.array([[-1.2]]), np.array([[2.0]])]
        network.biases = [np.array([0.1]), np.array([0.2]), np.array([-0.3])]
        x = 0.7
        expected = 1.0 / (1.0 + np.exp(-(2.0 * np.tanh(-1.2 * np.tanh(0.5 * x + 0.1) + 0.2) - 0.3)))
        self.assertAlmostEqual(forward(network, [x]), expected, delta=1e-12)

    def test_output_strictly_inside_unit_interval(self):
        network = init_network(3, 2)
        rng = np.random.default_rng(1)
        samples = rng.normal(0, 50, size=(200, 3))
        probabilities = forward_batch(network, samples)
        self.assertTrue(((probabilities > 0) & (probabilities < 1)).all())

    def test_forward_is_pure(self):
        network = init_network(3, 2)
        sample = np.array([0.2, 0.4, 0.9])
        self.assertEqual(forward(network, sample), forward(network, sample))

    def test_width_mismatch(self):
        with self.assertRaises(DomainError):
            forward(init_network(3, 2), np.ones(4))


class TrainTests(SimpleTestCase):
    """Tests for mini-batch training."""

    def setUp(self):
        self.samples, self.labels = separable_set()
        self.params = TrainParams(epochs=200, batch_size=16, learning_rate=0.05, patience=200)

    def test_separable_set_fits_exactly(self):
        network, trace = train(init_network(2, 4, hidden_layers=(8,)),
                               self.samples, self.labels, self.params)
        predictions = predict(network, self.samples)
        self.assertEqual(float(np.mean(predictions.labels == self.labels)), 1.0)
        self.assertTrue(all(np.isfinite(trace.losses)))

    def test_loss_never_worse_than_initial(self):
        initial = init_network(2, 9, hidden_layers=(8,))
        trained, _ = train(initial, self.samples, self.labels,
                           TrainParams(epochs=5, learning_rate=0.05))
        targets = self.labels.astype(float)
        self.assertLessEqual(mean_loss(trained, self.samples, targets),
                             mean_loss(initial, self.samples, targets))

    def test_residuals_are_label_minus_probability(self):
        network, trace = train(init_network(2, 4, hidden_layers=(8,)),
                               self.samples, self.labels, TrainParams(epochs=3))
        expected = self.labels - forward_batch(network, self.samples)
        np.testing.assert_allclose(trace.residuals, expected)
        self.assertTrue((np.abs(trace.residuals) < 1).all())

    def test_zero_epochs_returns_input_parameters(self):
        initial = init_network(2, 4)
        trained, trace = train(initial, self.samples, self.labels, TrainParams(epochs=0))
        self.assertTrue(trained.same_parameters(initial))
        self.assertEqual(trace.losses, [])

    def test_input_network_untouched(self):
        initial = init_network(2, 4)
        snapshot = initial.copy()
        train(initial, self.samples, self.labels, TrainParams(epochs=2))
        self.assertTrue(initial.same_parameters(snapshot))

    def test_fixed_seed_is_bit_identical(self):
        first, _ = train(init_network(2, 4), self.samples, self.labels, TrainParams(epochs=5))
        second, _ = train(init_network(2, 4), self.samples, self.labels, TrainParams(epochs=5))
        self.assertTrue(first.same_parameters(second))

    def test_batch_larger_than_set_is_clamped(self):
        network, trace = train(init_network(2, 4, hidden_layers=(4,)), self.samples[:10],
                               self.labels[:10], TrainParams(epochs=3, batch_size=500))
        self.assertEqual(len(trace.losses), 3)

    def test_patience_stops_early(self):
        _, trace = train(init_network(2, 4, hidden_layers=(4,)), self.samples, self.labels,
                         TrainParams(epochs=100, learning_rate=1e-300, momentum=0.0, patience=2))
        self.assertTrue(trace.stopped_early)
        self.assertLess(len(trace.losses), 100)

    def test_single_class_rejected(self):
        with self.assertRaises(DomainError):
            train(init_network(2, 4), self.samples, np.ones(len(self.labels), dtype=int),
                  self.params)

    def test_non_finite_loss_raises_training_error(self):
        samples = self.samples.copy()
        samples[0, 0] = np.nan
        with self.assertRaises(TrainingError) as ctx:
            train(init_network(2, 4), samples, self.labels, TrainParams(epochs=3))
        self.assertEqual(ctx.exception.epoch, 1)


class TrainParamsTests(SimpleTestCase):
    """Tests for training parameter validation."""

    def test_defaults(self):
        params = TrainParams()
        self.assertEqual((params.epochs, params.batch_size, params.learning_rate,
                          params.momentum, params.patience), (300, 32, 0.01, 0.9, 30))

    def test_invalid_values(self):
        for overrides in ({'batch_size': 0}, {'learning_rate': -0.1}, {'momentum': 1.0},
                          {'epochs': -1}, {'patience': 0}):
            with self.subTest(overrides=overrides), self.assertRaises(ConfigurationError):
                TrainParams(**overrides)


class PredictTests(SimpleTestCase):
    """Tests for thresholded prediction."""

    def test_half_probability_counts_as_legitimate(self):
        predictions = predict(zero_network(3), np.random.default_rng(0).uniform(size=(7, 3)))
        self.assertTrue((predictions.probabilities == 0.5).all())
        self.assertTrue((predictions.labels == 1).all())

    def test_partitions_are_complementary(self):
        samples, labels = separable_set(40)
        network, _ = train(init_network(2, 1, hidden_layers=(6,)), samples, labels,
                           TrainParams(epochs=20))
        predictions = predict(network, samples, index_map=np.arange(100, 140))
        together = np.sort(np.concatenate([predictions.predicted_legitimate,
                                           predictions.predicted_fake]))
        np.testing.assert_array_equal(together, np.arange(100, 140))
        self.assertEqual(len(predictions), 40)

    def test_matches_independent_forward(self):
        """Labels agree with a loop re-implementation of forward and threshold."""
        samples, labels = separable_set(60, seed=3)
        network, _ = train(init_network(2, 2, hidden_layers=(5, 5)), samples, labels,
                           TrainParams(epochs=30, learning_rate=0.05))
        grid = np.array([[x, y] for x in np.linspace(0, 1, 11) for y in np.linspace(0, 1, 11)])

        expected = []
        for point in grid:
            hidden = point
            for w, b in zip(network.weights[:-1], network.biases[:-1]):
                hidden = np.tanh(hidden @ w + b)
            logit = float(hidden @ network.weights[-1][:, 0] + network.biases[-1][0])
            expected.append(1 if 1.0 / (1.0 + np.exp(-logit)) >= 0.5 else 0)

        np.testing.assert_array_equal(predict(network, grid).labels, expected)

    def test_threshold_range(self):
        with self.assertRaises(DomainError):
            predict(zero_network(2), np.ones((1, 2)), threshold=1.0)


class GradientCheckTests(SimpleTestCase):
    """Tests for the finite-difference gradient check."""

    def test_random_small_networks(self):
        rng = np.random.default_rng(2024)
        for trial in range(20):
            d = int(rng.integers(1, 5))
            hidden = tuple(int(h) for h in rng.integers(1, 6, size=rng.integers(1, 4)))
            network = init_network(d, trial, hidden_layers=hidden)
            for bias in network.biases:
                bias[...] = rng.normal(0.0, 0.5, size=bias.shape)
            sample = rng.uniform(0.0, 1.0, size=d)
            label = int(rng.integers(0, 2))
            with self.subTest(trial=trial):
                self.assertLess(gradient_check(network, sample, label, epsilon=1e-5), 1e-4)

    def test_saturated_point_uses_absolute_fallback(self):
        network = zero_network(3)
        network.biases[-1][...] = 40.0
        self.assertLess(gradient_check(network, np.ones(3), 1), 1e-6)

    def test_logistic_reduction_gradient(self):
        network = init_network(3, 8, hidden_layers=())
        network.biases[0][...] = 0.3
        x = np.array([0.2, -0.5, 0.9])
        y = 0
        _, grad_w, grad_b = backward(network, x.reshape(1, -1), np.array([float(y)]))
        p = float(sigmoid(np.array([x @ network.weights[0][:, 0] + 0.3]))[0])
        np.testing.assert_allclose(grad_w[0][:, 0], (p - y) * x, rtol=0, atol=1e-12)
        self.assertAlmostEqual(float(grad_b[0][0]), p - y, delta=1e-12)

    def test_epsilon_range(self):
        with self.assertRaises(DomainError):
            gradient_check(zero_network(2), np.ones(2), 1, epsilon=1e-2)


class TrainingServiceTests(SimpleTestCase):
    """Tests for restarts and argmin selection."""

    def test_restarts_come_back_in_seed_order(self):
        samples, labels = separable_set(30)
        params = TrainParams(epochs=2)
        serial = TrainingService.train_restarts(samples, labels, params, [5, 6, 7],
                                                hidden_layers=(4,))
        threaded = TrainingService.train_restarts(samples, labels, params, [5, 6, 7],
                                                  hidden_layers=(4,), workers=3)
        self.assertEqual([o.seed for o in threaded], [5, 6, 7])
        for a, b in zip(serial, threaded):
            self.assertTrue(a.network.same_parameters(b.network))

    def test_argmin_picks_smallest_residual_norm(self):
        network = zero_network(2)
        outcomes = [
            RunOutcome(3, network, TrainingTrace(residuals=np.array([0.5, 0.5]))),
            RunOutcome(4, network, TrainingTrace(residuals=np.array([0.1, 0.2]))),
            RunOutcome(5, network, TrainingTrace(residuals=np.array([0.2, 0.1]))),
        ]
        self.assertEqual(TrainingService.select_argmin(outcomes).seed, 4)


class NetworkSerializerTests(SimpleTestCase):
    """Tests for model JSON."""

    def test_round_trip_is_byte_identical(self):
        samples, labels = separable_set(30)
        network, _ = train(init_network(2, 3, hidden_layers=(4, 4)), samples, labels,
                           TrainParams(epochs=3))
        features = {'names': ['latitude', 'longitude'], 'minimums': [0.0, 0.0],
                    'maximums': [1.0, 1.0]}
        text = dump_json(network_to_payload(network, features))

        serializer = NetworkSerializer(data=json.loads(text))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        restored = serializer.to_network()
        self.assertIsInstance(restored, MlpNetwork)
        self.assertTrue(restored.same_parameters(network))
        self.assertEqual(dump_json(network_to_payload(restored, serializer.validated_data['input'])),
                         text)

    def test_rejects_wrong_output_width(self):
        payload = network_to_payload(init_network(2, 3, hidden_layers=(4,)))
        payload['layer_sizes'] = [2, 4, 2]
        serializer = NetworkSerializer(data=payload)
        self.assertFalse(serializer.is_valid())
        self.assertIn('layer_sizes', serializer.errors)

    def test_rejects_misshapen_weights(self):
        payload = network_to_payload(init_network(2, 3, hidden_layers=(4,)))
        payload['weights'][0] = payload['weights'][0][:1]
        serializer = NetworkSerializer(data=payload)
        self.assertFalse(serializer.is_valid())
        self.assertIn('weights', serializer.errors)
