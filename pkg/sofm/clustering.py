"""
Cluster assignment, legitimacy marking and dataset partitioning.
"""

import logging

import numpy as np

from core.exceptions import ConfigurationError, DomainError, StateError
from core.logging import log_stage_activity
from core.validators import require_binary_labels, require_width
from taskgen.models import LEGITIMATE
from .models import MARK_LEGITIMATE_ONLY, MARK_MIXED, ClusterPartition

logger = logging.getLogger('fakeguard.sofm')

CHUNK_SIZE = 4096


def assign_clusters(sofm_map, samples):
    """Winning neuron of every sample row."""
    if not sofm_map.trained:
        raise StateError("the map must be trained before assigning clusters.")
    samples = require_width(samples, sofm_map.width)
    assignment = np.empty(samples.shape[0], dtype=np.int64)
    for start in range(0, samples.shape[0], CHUNK_SIZE):
        block = samples[start:start + CHUNK_SIZE]
        squared = ((block[:, None, :] - sofm_map.weights[None, :, :]) ** 2).sum(axis=2)
        assignment[start:start + CHUNK_SIZE] = np.argmin(squared, axis=1)
    return assignment


def cluster_counts(assignment, labels, neuron_count):
    """(neuron_count, 2) array of legitimate and fake members per neuron."""
    assignment = np.asarray(assignment, dtype=np.int64)
    labels = require_binary_labels(labels)
    if assignment.shape[0] != labels.shape[0]:
        raise DomainError(f"{assignment.shape[0]} assignments but {labels.shape[0]} labels.")
    if assignment.size and (assignment.min() < 0 or assignment.max() >= neuron_count):
        raise DomainError("assignment refers to a neuron outside the map.")
    legitimate = np.bincount(assignment[labels == LEGITIMATE], minlength=neuron_count)
    fake = np.bincount(assignment[labels != LEGITIMATE], minlength=neuron_count)
    return np.column_stack([legitimate, fake])


def label_clusters(assignment, labels, neuron_count, purity_threshold=1.0):
    """
    Mark a neuron legitimate-only when it has members and their legitimate
    share reaches the purity threshold; everything else is mixed.
    """
    if not 0.5 < purity_threshold <= 1.0:
        raise ConfigurationError(
            f"purity_threshold must lie in (0.5, 1], got {purity_threshold!r}.",
            details={'field': 'purity_threshold'},
        )
    marks = []
    for legitimate, fake in cluster_counts(assignment, labels, neuron_count):
        size = legitimate + fake
        pure = size > 0 and legitimate / size >= purity_threshold
        marks.append(MARK_LEGITIMATE_ONLY if pure else MARK_MIXED)
    return tuple(marks)


def label_map(sofm_map, samples, labels, purity_threshold=1.0):
    """Labeled copy of a trained map, marked from its own training data."""
    assignment = assign_clusters(sofm_map, samples)
    labeled = sofm_map.copy()
    labeled.cluster_marks = label_clusters(assignment, labels, sofm_map.neuron_count,
                                           purity_threshold)
    log_stage_activity('sofm', 'clusters labeled', details={
        'legitimate_only': len(labeled.legitimate_only_neurons()),
        'neurons': sofm_map.neuron_count,
    })
    return labeled


def partition(sofm_map, dataset, samples):
    """
    Split a dataset by the mark of each record's winning neuron. samples are
    the dataset's rows in the map's feature space, aligned with the records.
    """
    if not sofm_map.is_labeled:
        raise StateError("the map must be labeled before partitioning.")
    samples = require_width(samples, sofm_map.width)
    if samples.shape[0] != len(dataset):
        raise DomainError(f"{samples.shape[0]} sample rows for {len(dataset)} records.")

    assignment = assign_clusters(sofm_map, samples)
    pure = np.array([mark == MARK_LEGITIMATE_ONLY for mark in sofm_map.cluster_marks], dtype=bool)
    routed = pure[assignment] if assignment.size else np.zeros(0, dtype=bool)
    legitimate_indices = np.flatnonzero(routed)
    mixed_indices = np.flatnonzero(~routed)
    return ClusterPartition(
        legitimate_only=dataset.subset(legitimate_indices),
        mixed=dataset.subset(mixed_indices),
        assignment=assignment,
        legitimate_indices=legitimate_indices,
        mixed_indices=mixed_indices,
    )
