from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.exceptions import ConfigurationError
from core.validators import ConfigValidationMixin
from taskgen.models import FAKE, Dataset

MARK_LEGITIMATE_ONLY = 'legitimate_only'
MARK_MIXED = 'mixed'
MARK_CHOICES = (
    (MARK_LEGITIMATE_ONLY, 'Legitimate-only'),
    (MARK_MIXED, 'Mixed'),
)

# one-letter lattice symbols used by the cluster map rendering
MARK_SYMBOLS = {MARK_LEGITIMATE_ONLY: 'L', MARK_MIXED: 'M'}

DECAY_LINEAR = 'linear'
DECAY_CHOICES = (DECAY_LINEAR,)


@dataclass(frozen=True)
class SofmParams(ConfigValidationMixin):
    """
    Online training schedule. Learning rate and neighbourhood radius move
    linearly from their initial values at the first epoch to the floors at
    the last one.
    """
    epochs: int = 200
    alpha0: float = 0.5
    sigma0: float = 2.0
    alpha_min: float = 0.01
    sigma_min: float = 0.5
    rng_seed: int = 0
    decay: str = DECAY_LINEAR

    def __post_init__(self):
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 1:
            raise ConfigurationError(
                f"epochs must be an integer >= 1, got {self.epochs!r}.",
                details={'field': 'epochs'},
            )
        self.validate_interval(self.alpha0, 0.0, 1.0, 'alpha0', low_open=True)
        self.validate_positive_number(self.sigma0, 'sigma0')
        self.validate_interval(self.alpha_min, 0.0, self.alpha0, 'alpha_min', low_open=True)
        self.validate_interval(self.sigma_min, 0.0, self.sigma0, 'sigma_min', low_open=True)
        self.validate_seed(self.rng_seed)
        if self.decay not in DECAY_CHOICES:
            raise ConfigurationError(
                f"decay must be one of {DECAY_CHOICES}, got {self.decay!r}.",
                details={'field': 'decay'},
            )

    def _progress(self, epoch):
        return epoch / (self.epochs - 1) if self.epochs > 1 else 0.0

    def learning_rate(self, epoch):
        """Learning rate at a zero-based epoch."""
        return self.alpha0 + (self.alpha_min - self.alpha0) * self._progress(epoch)

    def radius(self, epoch):
        return self.sigma0 + (self.sigma_min - self.sigma0) * self._progress(epoch)

    def describe(self):
        return {
            'epochs': int(self.epochs),
            'alpha0': float(self.alpha0),
            'sigma0': float(self.sigma0),
            'alpha_min': float(self.alpha_min),
            'sigma_min': float(self.sigma_min),
            'rng_seed': int(self.rng_seed),
            'decay': self.decay,
        }


@dataclass
class SofmMap:
    """
    rows x cols lattice of prototype vectors, stored row-major as a
    (rows * cols, d) array. cluster_marks stays None until labeling.
    """
    rows: int
    cols: int
    weights: np.ndarray
    cluster_marks: Optional[Tuple[str, ...]] = None
    trained: bool = False
    params: Optional[SofmParams] = None
    rng_seed: Optional[int] = None
    feature_names: Tuple[str, ...] = ()

    @property
    def neuron_count(self):
        return self.rows * self.cols

    @property
    def width(self):
        return self.weights.shape[1]

    @property
    def is_labeled(self):
        return self.cluster_marks is not None

    def position(self, neuron):
        """(row, col) of a row-major neuron index."""
        return divmod(int(neuron), self.cols)

    def legitimate_only_neurons(self):
        if not self.is_labeled:
            return ()
        return tuple(i for i, mark in enumerate(self.cluster_marks) if mark == MARK_LEGITIMATE_ONLY)

    def mark_lattice(self):
        """One string per lattice row, L for legitimate-only and M for mixed."""
        marks = self.cluster_marks or (MARK_MIXED,) * self.neuron_count
        return [
            ''.join(MARK_SYMBOLS[marks[row * self.cols + col]] for col in range(self.cols))
            for row in range(self.rows)
        ]

    def copy(self):
        return SofmMap(
            rows=self.rows,
            cols=self.cols,
            weights=self.weights.copy(),
            cluster_marks=self.cluster_marks,
            trained=self.trained,
            params=self.params,
            rng_seed=self.rng_seed,
            feature_names=tuple(self.feature_names),
        )


@dataclass(frozen=True)
class ClusterPartition:
    """
    Disjoint split of a dataset by the mark of each record's winning neuron.
    Both index arrays are ascending positions into the source dataset.
    """
    legitimate_only: Dataset
    mixed: Dataset
    assignment: np.ndarray
    legitimate_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    mixed_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __len__(self):
        return len(self.legitimate_only) + len(self.mixed)

    @property
    def precl_fakes(self):
        """Fake records routed to the legitimate-only subset."""
        return sum(1 for record in self.legitimate_only if record.legitimacy == FAKE)

    def reconstruct(self):
        """Merge both subsets back into the source order."""
        records = [None] * len(self)
        for position, record in zip(self.legitimate_indices, self.legitimate_only):
            records[int(position)] = record
        for position, record in zip(self.mixed_indices, self.mixed):
            records[int(position)] = record
        return Dataset(tuple(records), origin=self.legitimate_only.origin)

    def fake_shares(self, source):
        """Fake share of the source dataset and of each subset (None when empty)."""
        def share(dataset):
            return dataset.fake_total / len(dataset) if len(dataset) else None

        return {
            'full': share(source),
            'mixed': share(self.mixed),
            'legitimate_only': share(self.legitimate_only),
        }
