# app/models/trial.py
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.utils.array_helpers import first_occurrence_codes
from app.utils.exceptions import ErrorKind, raise_error, raise_parse_error, raise_shape_mismatch
from app.utils.validators import validate_finite


class EmbeddingMatrix(BaseModel):
    """n x d float64 matrix, one row per observation (a space Z_m or the raw input X)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def coerce_values(cls, v):
        try:
            arr = np.array(v, dtype=np.float64, order="C")
        except (TypeError, ValueError) as exc:
            raise_parse_error("embedding", str(exc))
        if arr.ndim != 2:
            raise_shape_mismatch(f"embedding must be 2-D, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise_error(ErrorKind.EMPTY_INPUT, f"embedding has shape {arr.shape}")
        validate_finite(arr, "embedding")
        arr.flags.writeable = False
        return arr

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


class Partition(BaseModel):
    """Canonical cluster labels 0..k-1 for n observations"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: np.ndarray
    k: int

    @field_validator("labels", mode="before")
    @classmethod
    def coerce_labels(cls, v):
        arr = np.array(v, dtype=np.int64)
        if arr.ndim != 1:
            raise_shape_mismatch(f"labels must be 1-D, got {arr.ndim}-D")
        if arr.size == 0:
            raise_error(ErrorKind.EMPTY_INPUT, "labels are empty")
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def check_contiguous(self):
        present = np.unique(self.labels)
        if not (1 <= self.k <= self.labels.size):
            raise_error(ErrorKind.DEGENERATE_K, f"k={self.k} outside 1..{self.labels.size}")
        if present.size != self.k or present[0] != 0 or present[-1] != self.k - 1:
            raise_error(ErrorKind.PARSE_ERROR, "labels are not contiguous 0..k-1; canonicalize first")
        return self

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Relabel arbitrary integer ids to 0..k-1 by first occurrence."""
        arr = np.asarray(labels)
        if arr.size == 0:
            raise_error(ErrorKind.EMPTY_INPUT, "cannot canonicalize an empty label sequence")
        if arr.dtype.kind not in "iub":
            if arr.dtype.kind == "f" and np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)):
                arr = arr.astype(np.int64)
            else:
                raise_parse_error("labels", "labels must be integers")
        codes = first_occurrence_codes(arr.ravel())
        return cls(labels=codes, k=int(codes.max()) + 1)

    @property
    def n(self) -> int:
        return self.labels.size

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


class Trial(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    id: str
    embedding: EmbeddingMatrix
    partition: Partition

    @model_validator(mode="after")
    def check_lengths(self):
        if self.partition.n != self.embedding.n:
            raise_shape_mismatch(
                f"trial '{self.id}': {self.partition.n} labels for {self.embedding.n} embedding rows"
            )
        return self


class TrialBundle(BaseModel):
    """M trials evaluated together, plus the optional shared raw input and truth"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    trials: Tuple[Trial, ...]
    raw_input: Optional[EmbeddingMatrix] = None
    truth: Optional[Partition] = None
    dataset: Optional[str] = None

    @model_validator(mode="after")
    def check_consistency(self):
        if not self.trials:
            raise_error(ErrorKind.EMPTY_INPUT, "bundle has no trials")
        ids = [t.id for t in self.trials]
        if len(set(ids)) != len(ids):
            raise_error(ErrorKind.ID_MISMATCH, "trial ids must be unique")
        n = self.trials[0].embedding.n
        for trial in self.trials[1:]:
            if trial.embedding.n != n:
                raise_shape_mismatch(
                    f"trial '{trial.id}' has n={trial.embedding.n}, expected n={n}"
                )
        if self.raw_input is not None and self.raw_input.n != n:
            raise_shape_mismatch(f"raw input has n={self.raw_input.n}, expected n={n}")
        if self.truth is not None and self.truth.n != n:
            raise_shape_mismatch(f"truth has n={self.truth.n}, expected n={n}")
        return self

    @property
    def m(self) -> int:
        return len(self.trials)

    @property
    def n(self) -> int:
        return self.trials[0].embedding.n

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(t.id for t in self.trials)
