"""
Binary ReliefF feature weighting.

For every selected instance the k nearest hits (same class) and k nearest
misses (other class) are found by Euclidean distance over range-normalised
features. Each feature weight moves down by the mean hit difference and up
by the mean miss difference, divided by the number of instances.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from core.exceptions import DomainError
from core.logging import log_stage_activity
from core.validators import require_both_classes
from .models import FeatureRanking

logger = logging.getLogger('fakeguard.features')

CHUNK_SIZE = 32


def _range_normalised(rows):
    minimums = rows.min(axis=0)
    spans = rows.max(axis=0) - minimums
    # constant features get span 1 so every difference is exactly 0
    spans = np.where(spans == 0, 1.0, spans)
    return (rows - minimums) / spans


def _nearest(distances, candidates, k):
    """k candidate indices closest first, ties by ascending index."""
    if candidates.size == 0:
        return candidates
    order = np.argsort(distances[candidates], kind='stable')
    return candidates[order[:k]]


def _chunk_contribution(scaled, labels, chunk, k):
    total = np.zeros(scaled.shape[1])
    positions = np.arange(scaled.shape[0])
    deltas = scaled[chunk, None, :] - scaled[None, :, :]
    squared = np.einsum('ijk,ijk->ij', deltas, deltas)
    for row, instance in enumerate(chunk):
        distances = squared[row]
        same = labels == labels[instance]
        hits = _nearest(distances, positions[same & (positions != instance)], k)
        misses = _nearest(distances, positions[~same], k)
        point = scaled[instance]
        if hits.size:
            total -= np.abs(scaled[hits] - point).sum(axis=0) / hits.size
        if misses.size:
            total += np.abs(scaled[misses] - point).sum(axis=0) / misses.size
    return total


def relieff(matrix, k_neighbors=10, sample_count=None, rng_seed=0, workers=1):
    """
    Rank the features of a labelled matrix.

    sample_count None (or >= n) uses every instance, which makes the result
    independent of the seed.
    """
    if k_neighbors < 1:
        raise DomainError(f"k_neighbors must be >= 1, got {k_neighbors}.")
    if len(matrix) == 0:
        raise DomainError("ReliefF needs a non-empty matrix.")
    require_both_classes(matrix.labels, 'ReliefF input')

    n = len(matrix)
    if sample_count is None or sample_count >= n:
        instances = np.arange(n)
    else:
        if sample_count < 1:
            raise DomainError(f"sample_count must be >= 1, got {sample_count}.")
        rng = np.random.default_rng(rng_seed)
        instances = np.sort(rng.choice(n, size=sample_count, replace=False))

    scaled = _range_normalised(matrix.rows)
    chunks = [instances[start:start + CHUNK_SIZE]
              for start in range(0, instances.size, CHUNK_SIZE)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda chunk: _chunk_contribution(scaled, matrix.labels, chunk, k_neighbors),
                chunks,
            ))
    else:
        parts = [_chunk_contribution(scaled, matrix.labels, chunk, k_neighbors)
                 for chunk in chunks]

    # merged in chunk order so the sum does not depend on scheduling
    weights = np.zeros(matrix.width)
    for part in parts:
        weights += part
    weights /= instances.size

    ranking = FeatureRanking.from_weights(weights, matrix.feature_names)
    log_stage_activity('select', 'ReliefF ranking computed', details={
        'instances': int(instances.size),
        'k': k_neighbors,
        'order': list(ranking.order),
    })
    return ranking
