"""
Self-organizing feature map training.

Neurons sit on a rectangular lattice; the neighbourhood of the winning
neuron is a Gaussian over Chebyshev lattice distance.
"""

import logging

import numpy as np

from core.exceptions import DomainError
from core.logging import log_stage_activity
from core.validators import require_width
from .models import SofmMap

logger = logging.getLogger('fakeguard.sofm')


def init_map(rows, cols, d, rng_seed):
    """Untrained map with every weight component uniform in [0, 1]."""
    if rows < 1 or cols < 1 or d < 1:
        raise DomainError(f"map dimensions must be >= 1, got rows={rows}, cols={cols}, d={d}.")
    rng = np.random.default_rng(rng_seed)
    return SofmMap(rows=int(rows), cols=int(cols),
                   weights=rng.uniform(0.0, 1.0, size=(rows * cols, d)),
                   rng_seed=int(rng_seed))


def lattice_distances(rows, cols):
    """Chebyshev distance between every pair of row-major neurons."""
    r, c = np.divmod(np.arange(rows * cols), cols)
    return np.maximum(np.abs(r[:, None] - r[None, :]), np.abs(c[:, None] - c[None, :]))


def neighbourhood(distances, sigma):
    return np.exp(-(distances.astype(np.float64) ** 2) / (2.0 * sigma ** 2))


def _winner(weights, sample):
    # argmin returns the first minimum, so ties go to the lowest index
    return int(np.argmin(((weights - sample) ** 2).sum(axis=1)))


def bmu(sofm_map, sample):
    """Index of the neuron closest to the sample."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1 or sample.shape[0] != sofm_map.width:
        raise DomainError(
            f"sample must have {sofm_map.width} features, got shape {sample.shape}."
        )
    return _winner(sofm_map.weights, sample)


def update_toward(weights, sample, influence):
    """Move every neuron toward the sample by its influence (alpha * h)."""
    weights += influence[:, None] * (sample - weights)
    return weights


def train_sofm(sofm_map, samples, params):
    """
    Online training on shuffled samples; returns a trained copy of the map.
    """
    samples = require_width(samples, sofm_map.width)
    if samples.shape[0] == 0:
        raise DomainError("cannot train a map on an empty sample set.")

    trained = sofm_map.copy()
    rng = np.random.default_rng(params.rng_seed)
    distances = lattice_distances(trained.rows, trained.cols)
    weights = trained.weights

    for epoch in range(params.epochs):
        influence = params.learning_rate(epoch) * neighbourhood(distances, params.radius(epoch))
        for index in rng.permutation(samples.shape[0]):
            sample = samples[index]
            update_toward(weights, sample, influence[_winner(weights, sample)])

    trained.trained = True
    trained.cluster_marks = None
    trained.params = params
    log_stage_activity('sofm', 'map trained', details={
        'grid': f"{trained.rows}x{trained.cols}",
        'samples': int(samples.shape[0]),
        'epochs': params.epochs,
    })
    return trained
