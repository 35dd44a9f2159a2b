from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.exceptions import DomainError
from core.validators import require_binary_labels
from taskgen.models import CANDIDATE_FEATURES


@dataclass(frozen=True)
class FeatureMatrix:
    """
    n x d feature values with their column names and aligned legitimacy labels.
    """
    rows: np.ndarray
    feature_names: Tuple[str, ...]
    labels: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            rows = rows.reshape(-1, len(self.feature_names))
        labels = require_binary_labels(self.labels)
        if rows.shape[1] != len(self.feature_names):
            raise DomainError(
                f"{rows.shape[1]} feature columns but {len(self.feature_names)} names."
            )
        if rows.shape[0] != labels.shape[0]:
            raise DomainError(
                f"{rows.shape[0]} rows but {labels.shape[0]} labels."
            )
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'feature_names', tuple(self.feature_names))

    @classmethod
    def from_dataset(cls, dataset, names=CANDIDATE_FEATURES):
        return cls(dataset.feature_array(names), tuple(names), dataset.labels)

    @property
    def width(self):
        return len(self.feature_names)

    def __len__(self):
        return self.rows.shape[0]

    def select_columns(self, indices):
        indices = list(indices)
        for index in indices:
            if not 0 <= index < self.width:
                raise DomainError(f"feature index {index} out of range 0..{self.width - 1}.")
        return FeatureMatrix(
            self.rows[:, indices],
            tuple(self.feature_names[i] for i in indices),
            self.labels,
        )

    def select_rows(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(self.rows[indices], self.feature_names, self.labels[indices])


@dataclass(frozen=True)
class Scaler:
    """Per-feature (min, max) recorded from training rows."""
    minimums: np.ndarray
    maximums: np.ndarray

    @property
    def width(self):
        return self.minimums.shape[0]

    @property
    def spans(self):
        return self.maximums - self.minimums


@dataclass(frozen=True)
class FeatureRanking:
    """ReliefF weights and the feature order they induce."""
    weights: np.ndarray
    order: Tuple[int, ...]
    feature_names: Tuple[str, ...] = ()

    @classmethod
    def from_weights(cls, weights, feature_names=()):
        weights = np.asarray(weights, dtype=np.float64)
        # descending weight, ascending index on ties
        order = tuple(int(i) for i in sorted(range(weights.shape[0]),
                                             key=lambda i: (-weights[i], i)))
        return cls(weights, order, tuple(feature_names))

    def as_report(self, selected):
        return {
            'weights': [float(w) for w in self.weights],
            'order': list(self.order),
            'selected': [int(i) for i in selected],
            'feature_names': list(self.feature_names),
        }
