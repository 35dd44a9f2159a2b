from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import ConfigurationError
from core.validators import ConfigValidationMixin

DEFAULT_HIDDEN_LAYERS = (15, 15, 15, 15)

ACTIVATION_TANH = 'tanh'
ACTIVATION_SIGMOID = 'sigmoid'


@dataclass
class MlpNetwork:
    """
    Fully connected feedforward classifier.

    weights[l] has shape (layer_sizes[l], layer_sizes[l + 1]); the single
    output unit yields the probability that a task is legitimate.
    """
    layer_sizes: Tuple[int, ...]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    hidden_activation: str = ACTIVATION_TANH
    output_activation: str = ACTIVATION_SIGMOID
    rng_seed: Optional[int] = None
    train_params: Optional['TrainParams'] = None

    @property
    def input_width(self):
        return self.layer_sizes[0]

    @property
    def parameter_count(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self):
        return MlpNetwork(
            layer_sizes=tuple(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
            rng_seed=self.rng_seed,
            train_params=self.train_params,
        )

    def same_parameters(self, other):
        return (tuple(self.layer_sizes) == tuple(other.layer_sizes)
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))


@dataclass(frozen=True)
class TrainParams(ConfigValidationMixin):
    """Mini-batch gradient descent with momentum."""
    epochs: int = 300
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    rng_seed: int = 0
    patience: int = 30

    def __post_init__(self):
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 0:
            raise ConfigurationError(
                f"epochs must be a non-negative integer, got {self.epochs!r}.",
                details={'field': 'epochs'},
            )
        self.validate_positive_number(self.batch_size, 'batch_size')
        self.validate_positive_number(self.learning_rate, 'learning_rate')
        self.validate_interval(self.momentum, 0.0, 1.0, 'momentum', high_open=True)
        self.validate_positive_number(self.patience, 'patience')
        self.validate_seed(self.rng_seed)

    def describe(self):
        return {
            'epochs': int(self.epochs),
            'batch_size': int(self.batch_size),
            'learning_rate': float(self.learning_rate),
            'momentum': float(self.momentum),
            'rng_seed': int(self.rng_seed),
            'patience': int(self.patience),
        }


@dataclass
class TrainingTrace:
    """Per-epoch mean loss and the final per-sample residuals (label - probability)."""
    losses: List[float] = field(default_factory=list)
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0))
    stopped_early: bool = False
    best_epoch: int = 0

    @property
    def error_norm(self):
        return float(np.linalg.norm(self.residuals))


@dataclass(frozen=True)
class PredictionSet:
    """
    Thresholded predictions; index_map points back into the source records.
    """
    probabilities: np.ndarray
    labels: np.ndarray
    index_map: np.ndarray
    threshold: float = 0.5

    @property
    def predicted_legitimate(self):
        return self.index_map[self.labels == 1]

    @property
    def predicted_fake(self):
        return self.index_map[self.labels == 0]

    def __len__(self):
        return self.labels.shape[0]
