# app/models/score.py
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.models.index import IndexId
from app.utils.exceptions import raise_shape_mismatch


class MissingCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    row: int
    col: int
    reason: str


class ScoreMatrix(BaseModel):
    """
    Grid of index values: row = evaluating space, column = evaluated partition.

    `values` holds oriented scores and `raw_values` the un-oriented ones;
    missing cells are NaN in both and listed in `missing`.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    index: IndexId
    space_ids: Tuple[str, ...]
    partition_ids: Tuple[str, ...]
    values: np.ndarray
    raw_values: np.ndarray
    missing: Tuple[MissingCell, ...] = ()

    @model_validator(mode="after")
    def check_shape(self):
        shape = (len(self.space_ids), len(self.partition_ids))
        if self.values.shape != shape or self.raw_values.shape != shape:
            raise_shape_mismatch(f"score matrix values must have shape {shape}")
        self.values.flags.writeable = False
        self.raw_values.flags.writeable = False
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def column_of(self, trial_id: str) -> int:
        return self.partition_ids.index(trial_id)

    def paired(self) -> np.ndarray:
        """Oriented score of each row's own partition (the diagonal when rows == columns)."""
        cols = [self.column_of(sid) for sid in self.space_ids]
        return self.values[np.arange(len(cols)), cols]

    def paired_raw(self) -> np.ndarray:
        cols = [self.column_of(sid) for sid in self.space_ids]
        return self.raw_values[np.arange(len(cols)), cols]
