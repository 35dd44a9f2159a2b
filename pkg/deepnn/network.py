"""
Feedforward network: tanh hidden layers, one sigmoid output unit, binary
cross-entropy loss, trained by mini-batch gradient descent with momentum.
"""

import logging

import numpy as np

from core.exceptions import DomainError, TrainingError
from core.validators import require_binary_labels, require_both_classes, require_width
from .models import (
    ACTIVATION_SIGMOID, ACTIVATION_TANH, DEFAULT_HIDDEN_LAYERS, MlpNetwork,
    PredictionSet, TrainingTrace,
)

logger = logging.getLogger('fakeguard.deepnn')

# keeps reported probabilities strictly inside (0, 1)
PROBABILITY_EPS = 1e-15
# below this magnitude gradient_check compares absolute differences
GRADIENT_FLOOR = 1e-8


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def softplus(z):
    return np.logaddexp(0.0, z)


def init_network(d, rng_seed, hidden_layers=DEFAULT_HIDDEN_LAYERS):
    """
    Glorot-uniform weights in [-r, r], r = sqrt(6 / (fan_in + fan_out)), zero biases.
    """
    if d < 1:
        raise DomainError(f"network input width must be >= 1, got {d}.")
    rng = np.random.default_rng(rng_seed)
    sizes = (int(d),) + tuple(int(h) for h in hidden_layers) + (1,)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(layer_sizes=sizes, weights=weights, biases=biases,
                      hidden_activation=ACTIVATION_TANH,
                      output_activation=ACTIVATION_SIGMOID, rng_seed=int(rng_seed))


def _forward_pass(network, samples):
    """Activations of every layer (input first) and the output logits."""
    activations = [samples]
    current = samples
    last = len(network.weights) - 1
    for index, (weight, bias) in enumerate(zip(network.weights, network.biases)):
        z = current @ weight + bias
        if index == last:
            return activations, z[:, 0]
        current = np.tanh(z)
        activations.append(current)
    raise DomainError("network has no layers.")


def forward_batch(network, samples):
    samples = require_width(samples, network.input_width)
    _, logits = _forward_pass(network, samples)
    return np.clip(sigmoid(logits), PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)


def forward(network, sample):
    """Probability that a single sample is a legitimate task."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1 or sample.shape[0] != network.input_width:
        raise DomainError(
            f"sample must have {network.input_width} features, got shape {sample.shape}."
        )
    return float(forward_batch(network, sample.reshape(1, -1))[0])


def mean_loss(network, samples, labels):
    """Mean binary cross-entropy, computed from the logits."""
    _, logits = _forward_pass(network, samples)
    return float(np.mean(softplus(logits) - labels * logits))


def backward(network, samples, labels):
    """Loss and its gradients with respect to every weight matrix and bias vector."""
    activations, logits = _forward_pass(network, samples)
    n = samples.shape[0]
    loss = float(np.mean(softplus(logits) - labels * logits))

    delta = ((sigmoid(logits) - labels) / n).reshape(-1, 1)
    grad_weights = [None] * len(network.weights)
    grad_biases = [None] * len(network.biases)
    for index in range(len(network.weights) - 1, -1, -1):
        grad_weights[index] = activations[index].T @ delta
        grad_biases[index] = delta.sum(axis=0)
        if index > 0:
            delta = (delta @ network.weights[index].T) * (1.0 - activations[index] ** 2)
    return loss, grad_weights, grad_biases


def _check_training_data(network, samples, labels):
    samples = require_width(samples, network.input_width)
    labels = require_binary_labels(labels)
    if samples.shape[0] != labels.shape[0]:
        raise DomainError(f"{samples.shape[0]} samples but {labels.shape[0]} labels.")
    require_both_classes(labels)
    return samples, labels.astype(np.float64)


def train(network, samples, labels, params):
    """
    Train a copy of the network; returns the parameters with the lowest
    full-set loss seen (the initial ones included) and the training trace.
    """
    samples, targets = _check_training_data(network, samples, labels)
    trained = network.copy()
    trained.train_params = params
    trace = TrainingTrace()

    if params.epochs > 0:
        rng = np.random.default_rng(params.rng_seed)
        n = samples.shape[0]
        batch_size = min(params.batch_size, n)
        velocity_w = [np.zeros_like(w) for w in trained.weights]
        velocity_b = [np.zeros_like(b) for b in trained.biases]

        best = trained.copy()
        best_loss = mean_loss(trained, samples, targets)
        stale = 0

        for epoch in range(1, params.epochs + 1):
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                batch = order[start:start + batch_size]
                _, grad_w, grad_b = backward(trained, samples[batch], targets[batch])
                for layer in range(len(trained.weights)):
                    velocity_w[layer] = params.momentum * velocity_w[layer] - params.learning_rate * grad_w[layer]
                    velocity_b[layer] = params.momentum * velocity_b[layer] - params.learning_rate * grad_b[layer]
                    trained.weights[layer] += velocity_w[layer]
                    trained.biases[layer] += velocity_b[layer]

            epoch_loss = mean_loss(trained, samples, targets)
            if not np.isfinite(epoch_loss):
                raise TrainingError(
                    f"training loss became non-finite at epoch {epoch} "
                    f"(learning rate {params.learning_rate}, momentum {params.momentum}).",
                    epoch=epoch, learning_rate=params.learning_rate,
                )
            trace.losses.append(epoch_loss)

            if epoch_loss < best_loss:
                best, best_loss, stale = trained.copy(), epoch_loss, 0
                trace.best_epoch = epoch
            else:
                stale += 1
                if stale >= params.patience:
                    trace.stopped_early = True
                    break

        trained = best
        trained.train_params = params

    trace.residuals = targets - forward_batch(trained, samples)
    return trained, trace


def predict(network, samples, threshold=0.5, index_map=None):
    """Label 1 (legitimate) iff the probability reaches the threshold."""
    if not 0 < threshold < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}.")
    samples = require_width(samples, network.input_width)
    probabilities = forward_batch(network, samples) if samples.shape[0] else np.empty(0)
    labels = (probabilities >= threshold).astype(np.int64)
    if index_map is None:
        index_map = np.arange(samples.shape[0])
    index_map = np.asarray(index_map, dtype=np.int64)
    if index_map.shape[0] != labels.shape[0]:
        raise DomainError("index_map must have one entry per sample.")
    return PredictionSet(probabilities, labels, index_map, threshold)


def gradient_check(network, sample, label, epsilon=1e-5):
    """
    Largest relative error between backpropagated gradients and central
    finite differences over every parameter, for a single sample.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise DomainError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}.")
    samples = require_width(np.asarray(sample, dtype=np.float64).reshape(1, -1),
                            network.input_width)
    targets = np.array([float(label)])
    _, grad_w, grad_b = backward(network, samples, targets)

    probe = network.copy()
    worst = 0.0
    for arrays, grads in ((probe.weights, grad_w), (probe.biases, grad_b)):
        for array, analytic in zip(arrays, grads):
            for position in np.ndindex(array.shape):
                original = array[position]
                array[position] = original + epsilon
                plus = mean_loss(probe, samples, targets)
                array[position] = original - epsilon
                minus = mean_loss(probe, samples, targets)
                array[position] = original
                numeric = (plus - minus) / (2 * epsilon)
                exact = analytic[position]
                scale = max(abs(numeric), abs(exact))
                error = abs(numeric - exact)
                if scale >= GRADIENT_FLOOR:
                    error /= scale
                worst = max(worst, error)
    return worst
