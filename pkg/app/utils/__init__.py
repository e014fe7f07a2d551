# app/utils/__init__.py
"""
Utility functions for common operations
"""
from .exceptions import (
    AceError,
    ErrorKind,
    raise_missing_file,
    raise_parse_error,
    raise_shape_mismatch,
    raise_length_mismatch,
    raise_degenerate_k,
    raise_invalid_alpha,
    raise_invalid_params,
    raise_usage,
    raise_error,
)
from .validators import (
    validate_finite,
    validate_alpha,
    validate_same_length,
    validate_min_points,
    validate_sorted,
    validate_probabilities,
)
from .array_helpers import (
    first_occurrence_codes,
    one_hot,
    cluster_barycenters,
    distance_matrix,
    condensed_distances,
    distances_to,
    rms_row_distances,
)
from .report_helpers import (
    nan_to_none,
    none_to_nan,
    matrix_to_rows,
    format_value,
    to_csv,
    score_matrix_csv,
    regime_table_csv,
    baselines_csv,
)

__all__ = [
    # Exceptions
    "AceError",
    "ErrorKind",
    "raise_missing_file",
    "raise_parse_error",
    "raise_shape_mismatch",
    "raise_length_mismatch",
    "raise_degenerate_k",
    "raise_invalid_alpha",
    "raise_invalid_params",
    "raise_usage",
    "raise_error",
    # Validators
    "validate_finite",
    "validate_alpha",
    "validate_same_length",
    "validate_min_points",
    "validate_sorted",
    "validate_probabilities",
    # Array Helpers
    "first_occurrence_codes",
    "one_hot",
    "cluster_barycenters",
    "distance_matrix",
    "condensed_distances",
    "distances_to",
    "rms_row_distances",
    # Report Helpers
    "nan_to_none",
    "none_to_nan",
    "matrix_to_rows",
    "format_value",
    "to_csv",
    "score_matrix_csv",
    "regime_table_csv",
    "baselines_csv",
]
