# app/models/grouping.py
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.utils.exceptions import ErrorKind, raise_error, raise_shape_mismatch

OUTLIER = -1


class GroupingMethod(str, Enum):
    HDBSCAN = "hdbscan"
    DBSCAN = "dbscan"


class DistanceMatrix(BaseModel):
    """Symmetric, finite, non-negative M x M distances with zero diagonal"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def coerce_values(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise_shape_mismatch(f"distance matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise_error(ErrorKind.NON_FINITE_VALUE, "distance matrix has non-finite entries")
        if np.any(arr < 0):
            raise_error(ErrorKind.INVALID_PARAMS, "distances must be non-negative")
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
            raise_error(ErrorKind.INVALID_PARAMS, "distance matrix must be symmetric")
        if np.any(np.diag(arr) != 0):
            raise_error(ErrorKind.INVALID_PARAMS, "distance matrix diagonal must be zero")
        arr = (arr + arr.T) / 2.0
        arr.flags.writeable = False
        return arr

    @classmethod
    def from_correlation(cls, corr: np.ndarray) -> "DistanceMatrix":
        """d_ij = 1 - corr_ij; undefined correlations count as zero correlation."""
        corr = np.nan_to_num(np.asarray(corr, dtype=np.float64), nan=0.0)
        dist = np.clip(1.0 - corr, 0.0, 2.0)
        np.fill_diagonal(dist, 0.0)
        return cls(values=dist)

    @property
    def size(self) -> int:
        return self.values.shape[0]


class Grouping(BaseModel):
    """
    Per-space assignment (subgroup id or OUTLIER) plus the subgroups as
    index sets. For a final stage-wise grouping, `subgroups` covers every
    space and `outliers` lists the phase-1 outliers that became singletons.
    """
    model_config = ConfigDict(frozen=True)

    assignment: Tuple[int, ...]
    subgroups: Tuple[Tuple[int, ...], ...]
    outliers: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def check_disjoint(self):
        seen = set()
        for group in self.subgroups:
            if not group:
                raise_error(ErrorKind.EMPTY_SUBGROUP, "subgroups must be non-empty")
            for member in group:
                if member in seen or not (0 <= member < len(self.assignment)):
                    raise_error(ErrorKind.INVALID_PARAMS, f"space {member} appears in two subgroups or is out of range")
                seen.add(member)
        return self

    @classmethod
    def from_labels(cls, labels) -> "Grouping":
        """Build from cluster labels (OUTLIER for noise), ids renumbered by first member."""
        labels = [int(v) for v in labels]
        remap = {}
        for label in labels:
            if label != OUTLIER and label not in remap:
                remap[label] = len(remap)
        assignment = tuple(remap.get(v, OUTLIER) for v in labels)
        subgroups = tuple(
            tuple(i for i, v in enumerate(assignment) if v == g) for g in range(len(remap))
        )
        outliers = tuple(i for i, v in enumerate(assignment) if v == OUTLIER)
        return cls(assignment=assignment, subgroups=subgroups, outliers=outliers)

    @property
    def size(self) -> int:
        return len(self.assignment)

    def is_outlier_subgroup(self, members) -> bool:
        """True for the singleton built from a phase-1 outlier"""
        members = tuple(members)
        return len(members) == 1 and members[0] in self.outliers
