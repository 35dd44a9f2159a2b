import math

import numpy as np

from .exceptions import ConfigurationError, DomainError


class ConfigValidationMixin:
    """
    Mixin that provides common validation methods for configuration types.

    Every method raises ConfigurationError naming the offending field.
    """

    def validate_positive_number(self, value, field_name="value"):
        """Validate that a number is strictly positive and finite."""
        if value is None or not math.isfinite(value) or value <= 0:
            raise ConfigurationError(
                f"{field_name} must be a positive number, got {value!r}.",
                details={'field': field_name},
            )
        return value

    def validate_open_fraction(self, value, field_name="fraction"):
        """Validate that a ratio lies strictly between 0 and 1."""
        if value is None or not 0 < value < 1:
            raise ConfigurationError(
                f"{field_name} must lie in (0, 1), got {value!r}.",
                details={'field': field_name},
            )
        return value

    def validate_interval(self, value, low, high, field_name="value",
                          low_open=False, high_open=False):
        """Validate that a value lies in an interval with configurable bounds."""
        if value is None:
            below = above = True
        else:
            below = value <= low if low_open else value < low
            above = value >= high if high_open else value > high
        if below or above:
            left = '(' if low_open else '['
            right = ')' if high_open else ']'
            raise ConfigurationError(
                f"{field_name} must lie in {left}{low}, {high}{right}, got {value!r}.",
                details={'field': field_name},
            )
        return value

    def validate_seed(self, value, field_name="rng_seed"):
        """Validate a non-negative 64-bit seed."""
        if not isinstance(value, (int, np.integer)) or not 0 <= value < 2 ** 64:
            raise ConfigurationError(
                f"{field_name} must be an unsigned 64-bit integer, got {value!r}.",
                details={'field': field_name},
            )
        return int(value)


def require_non_empty(count, what="input"):
    """Raise DomainError when a collection is empty."""
    if count == 0:
        raise DomainError(f"{what} must not be empty.")
    return count


def require_binary_labels(labels, what="labels"):
    """Validate a 1-D array of 0/1 labels and return it as int array."""
    array = np.asarray(labels)
    if array.ndim != 1:
        raise DomainError(f"{what} must be one-dimensional.")
    if array.size and not np.isin(array, (0, 1)).all():
        raise DomainError(f"{what} must be binary (0 fake, 1 legitimate).")
    return array.astype(np.int64)


def require_both_classes(labels, what="training set"):
    """Raise DomainError when only one class is present."""
    present = set(np.unique(np.asarray(labels)).tolist())
    if present != {0, 1}:
        raise DomainError(
            f"{what} must contain both legitimate and fake tasks, found classes {sorted(present)}."
        )


def require_width(matrix, width, what="samples"):
    """Validate that a 2-D array has the expected number of columns."""
    array = np.asarray(matrix, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1) if array.size else array.reshape(0, width)
    if array.ndim != 2 or array.shape[1] != width:
        raise DomainError(
            f"{what} must have {width} features per row, got shape {array.shape}."
        )
    return array
