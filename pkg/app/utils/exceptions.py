# app/utils/exceptions.py
"""
Centralized error kinds and raise helpers for consistent failures
"""
from enum import Enum
from typing import Optional


# Process exit codes (sysexits.h where one fits)
EXIT_OK = 0
EXIT_NO_RETAINED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_SOFTWARE = 70
EXIT_IO = 74


class ErrorKind(str, Enum):
    # Input / storage
    MISSING_FILE = "missing_file"
    PARSE_ERROR = "parse_error"
    SHAPE_MISMATCH = "shape_mismatch"
    NON_FINITE_VALUE = "non_finite_value"
    EMPTY_INPUT = "empty_input"
    LENGTH_MISMATCH = "length_mismatch"
    ID_MISMATCH = "id_mismatch"
    MISSING_TRUTH = "missing_truth"
    MISSING_RAW_INPUT = "missing_raw_input"
    # Indices
    DEGENERATE_K = "degenerate_k"
    ZERO_WITHIN_DISPERSION = "zero_within_dispersion"
    COINCIDENT_CENTROIDS = "coincident_centroids"
    ZERO_DIAMETER = "zero_diameter"
    DEGENERATE_DISTANCES = "degenerate_distances"
    SINGULAR_TOTAL_SCATTER = "singular_total_scatter"
    EMPTY_CLUSTER = "empty_cluster"
    # Statistics
    TOO_FEW_POINTS = "too_few_points"
    UNSORTED = "unsorted"
    ZERO_VARIANCE = "zero_variance"
    DEGENERATE_VARIANCE = "degenerate_variance"
    INVALID_ALPHA = "invalid_alpha"
    INVALID_PARAMS = "invalid_params"
    INVALID_SPEC = "invalid_spec"
    NON_CONVERGENCE = "non_convergence"
    # Pipeline
    EMPTY_SUBGROUP = "empty_subgroup"
    NO_RETAINED_SPACES = "no_retained_spaces"
    USAGE_ERROR = "usage_error"

    @property
    def exit_code(self) -> int:
        if self is ErrorKind.NO_RETAINED_SPACES:
            return EXIT_NO_RETAINED
        if self is ErrorKind.USAGE_ERROR:
            return EXIT_USAGE
        if self is ErrorKind.MISSING_FILE:
            return EXIT_IO
        return EXIT_DATA


class AceError(Exception):
    """Domain failure carrying a stable kind, a message and the pipeline stage"""

    def __init__(self, kind: ErrorKind, detail: str, stage: Optional[str] = None):
        super().__init__(detail)
        self.kind = kind
        self.detail = detail
        self.stage = stage

    @property
    def exit_code(self) -> int:
        return self.kind.exit_code

    def with_stage(self, stage: str) -> "AceError":
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self) -> str:
        prefix = f"[{self.stage}] " if self.stage else ""
        return f"{prefix}{self.kind.value}: {self.detail}"


def raise_missing_file(path) -> None:
    """Raise MissingFile for a path that does not exist"""
    raise AceError(ErrorKind.MISSING_FILE, f"File not found: {path}")


def raise_parse_error(source, message: str) -> None:
    """Raise ParseError with the offending source"""
    raise AceError(ErrorKind.PARSE_ERROR, f"Could not parse {source}: {message}")


def raise_shape_mismatch(message: str) -> None:
    raise AceError(ErrorKind.SHAPE_MISMATCH, message)


def raise_length_mismatch(left: int, right: int) -> None:
    raise AceError(
        ErrorKind.LENGTH_MISMATCH,
        f"Sequences must have equal length (got {left} and {right})"
    )


def raise_degenerate_k(k: int, n: int, allowed: str = "2 <= K <= n-1") -> None:
    """Raise DegenerateK with the offending cluster count"""
    raise AceError(ErrorKind.DEGENERATE_K, f"Cluster count K={k} with n={n} violates {allowed}")


def raise_invalid_alpha(alpha: float) -> None:
    raise AceError(ErrorKind.INVALID_ALPHA, f"alpha must lie in (0, 1), got {alpha}")


def raise_invalid_params(message: str) -> None:
    raise AceError(ErrorKind.INVALID_PARAMS, message)


def raise_usage(message: str) -> None:
    raise AceError(ErrorKind.USAGE_ERROR, message)


def raise_error(kind: ErrorKind, message: str) -> None:
    """Raise any other error kind with a custom message"""
    raise AceError(kind, message)
