"""
Min-max normalisation fitted on training rows only.
"""

import numpy as np

from core.exceptions import DomainError
from .models import FeatureMatrix, Scaler


def fit_scaler(train):
    """Record per-feature minimum and maximum of the training rows."""
    if len(train) == 0:
        raise DomainError("cannot fit a scaler on an empty training matrix.")
    return Scaler(train.rows.min(axis=0), train.rows.max(axis=0))


def _check_width(scaler, matrix):
    if matrix.width != scaler.width:
        raise DomainError(
            f"scaler fitted on {scaler.width} features, matrix has {matrix.width}."
        )


def transform(scaler, matrix):
    """
    Map every feature to [0, 1]; values outside the training range are
    clamped and constant features map to 0.
    """
    _check_width(scaler, matrix)
    spans = scaler.spans
    constant = spans == 0
    safe_spans = np.where(constant, 1.0, spans)
    scaled = (matrix.rows - scaler.minimums) / safe_spans
    scaled = np.clip(scaled, 0.0, 1.0)
    scaled[:, constant] = 0.0
    return FeatureMatrix(scaled, matrix.feature_names, matrix.labels)


def inverse_transform(scaler, matrix):
    _check_width(scaler, matrix)
    return FeatureMatrix(matrix.rows * scaler.spans + scaler.minimums,
                         matrix.feature_names, matrix.labels)
