import numpy as np

from core.exceptions import DomainError
from core.validators import require_binary_labels
from .models import Metrics


def _ratio(numerator, denominator, name, undefined):
    if denominator == 0:
        undefined.append(name)
        return 0.0
    return numerator / denominator


def evaluate(labels_predicted, labels_true):
    """Confusion counts and derived metrics, legitimate (1) being positive."""
    predicted = require_binary_labels(labels_predicted, 'predicted labels')
    actual = require_binary_labels(labels_true, 'true labels')
    if predicted.shape[0] != actual.shape[0]:
        raise DomainError(
            f"{predicted.shape[0]} predicted labels but {actual.shape[0]} true labels."
        )

    tp = int(np.sum((predicted == 1) & (actual == 1)))
    tn = int(np.sum((predicted == 0) & (actual == 0)))
    fp = int(np.sum((predicted == 1) & (actual == 0)))
    fn = int(np.sum((predicted == 0) & (actual == 1)))

    undefined = []
    accuracy = _ratio(tp + tn, tp + tn + fp + fn, 'accuracy', undefined)
    precision = _ratio(tp, tp + fp, 'precision', undefined)
    recall = _ratio(tp, tp + fn, 'recall', undefined)
    f1 = _ratio(2 * precision * recall, precision + recall, 'f1', undefined)
    return Metrics(tp=tp, tn=tn, fp=fp, fn=fn, accuracy=accuracy, precision=precision,
                   recall=recall, f1=f1, undefined=tuple(undefined))


def paired_differences(minuend, subtrahend):
    """
    Per-seed accuracy differences between two reports over their shared
    seeds, with the mean difference.
    """
    left = minuend.accuracy_by_seed()
    right = subtrahend.accuracy_by_seed()
    shared = [seed for seed in minuend.seeds if seed in right]
    differences = [left[seed] - right[seed] for seed in shared]
    return {
        'seeds': shared,
        'differences': differences,
        'mean_difference': sum(differences) / len(differences) if differences else None,
    }
