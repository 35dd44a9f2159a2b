import logging
import math

import numpy as np

from core.exceptions import DomainError
from core.logging import log_stage_activity
from deepnn.models import TrainParams
from deepnn.network import init_network, predict, train

logger = logging.getLogger('fakeguard.features')


def select_top_k(ranking, k):
    """First k feature indices of the ranking order."""
    if not 1 <= k <= len(ranking.order):
        raise DomainError(f"k must lie in [1, {len(ranking.order)}], got {k}.")
    return list(ranking.order[:k])


def sequential_forward_select(matrix, ranking, k_max, evaluator):
    """
    Greedy forward pass over the ranked features.

    Starts from the best-ranked feature and keeps adding the next one while
    the evaluator score strictly improves, stopping at k_max features.
    """
    k_max = min(k_max, len(ranking.order))
    if k_max < 1:
        raise DomainError("k_max must be >= 1.")

    chosen = [ranking.order[0]]
    best = evaluator(list(chosen))
    for candidate in ranking.order[1:k_max]:
        score = evaluator(chosen + [candidate])
        if score <= best:
            break
        chosen.append(candidate)
        best = score

    log_stage_activity('select', 'sequential forward selection finished', details={
        'selected': list(chosen),
        'score': float(best),
    })
    return chosen


def holdout_evaluator(matrix, holdout_fraction=0.2, hidden_layers=(8,), params=None):
    """
    Evaluator scoring a feature subset by the accuracy of a shallow network
    trained on the leading rows and tested on the trailing holdout rows.
    """
    n = len(matrix)
    cut = int(math.floor(n * (1 - holdout_fraction)))
    if cut == 0 or cut == n:
        raise DomainError("holdout split leaves an empty part.")
    params = params or TrainParams(epochs=30, patience=5)
    train_part = matrix.select_rows(np.arange(cut))
    holdout = matrix.select_rows(np.arange(cut, n))

    def evaluate_subset(indices):
        train_rows = train_part.select_columns(indices)
        holdout_rows = holdout.select_columns(indices)
        network = init_network(len(indices), params.rng_seed, hidden_layers=hidden_layers)
        network, _ = train(network, train_rows.rows, train_rows.labels, params)
        predictions = predict(network, holdout_rows.rows)
        return float(np.mean(predictions.labels == holdout_rows.labels))

    return evaluate_subset
