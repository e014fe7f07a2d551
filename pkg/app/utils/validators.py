# app/utils/validators.py
"""
Validation utilities for common numeric input patterns
"""
from typing import Sequence

import numpy as np

from .exceptions import (
    ErrorKind,
    raise_error,
    raise_invalid_alpha,
    raise_length_mismatch,
)


def validate_finite(values: np.ndarray, name: str = "values"):
    """
    Validate every entry of an array is finite

    Args:
        values: Array to check
        name: Name used in the error message

    Raises:
        AceError: NonFiniteValue if a NaN or infinity is present
    """
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise_error(ErrorKind.NON_FINITE_VALUE, f"{name} contains {bad} non-finite entries")


def validate_alpha(alpha: float):
    """
    Validate a significance level lies strictly between 0 and 1

    Raises:
        AceError: InvalidAlpha otherwise
    """
    if not (0.0 < float(alpha) < 1.0):
        raise_invalid_alpha(alpha)


def validate_same_length(a: Sequence, b: Sequence):
    """
    Validate two paired sequences have equal length

    Raises:
        AceError: LengthMismatch otherwise
    """
    if len(a) != len(b):
        raise_length_mismatch(len(a), len(b))


def validate_min_points(n: int, minimum: int, what: str = "sample"):
    """
    Validate a sample has at least `minimum` observations

    Raises:
        AceError: TooFewPoints otherwise
    """
    if n < minimum:
        raise_error(ErrorKind.TOO_FEW_POINTS, f"{what} needs at least {minimum} points, got {n}")


def validate_sorted(sample: np.ndarray):
    """Raise Unsorted unless the sample is ascending"""
    if sample.size > 1 and np.any(np.diff(sample) < 0):
        raise_error(ErrorKind.UNSORTED, "sample must be sorted ascending")


def validate_probabilities(pvals: np.ndarray):
    """Raise InvalidParams if any p-value falls outside [0, 1]"""
    if np.any(np.isnan(pvals)) or np.any((pvals < 0.0) | (pvals > 1.0)):
        raise_error(ErrorKind.INVALID_PARAMS, "p-values must lie in [0, 1]")
