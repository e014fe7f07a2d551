# app/models/stats.py
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.utils.exceptions import ErrorKind, raise_error


class DipResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    dip: float = Field(gt=0.0, le=0.25 + 1e-12)
    p_value: float = Field(ge=0.0, le=1.0)
    replicates: int = Field(ge=1)


class RankCorrelation(BaseModel):
    """Spearman and Kendall coefficients; None marks an undefined coefficient"""
    model_config = ConfigDict(frozen=True)

    spearman_rs: Optional[float] = Field(default=None, ge=-1.0, le=1.0)
    kendall_tau_b: Optional[float] = Field(default=None, ge=-1.0, le=1.0)
    n: int

    @property
    def defined(self) -> bool:
        return self.spearman_rs is not None and self.kendall_tau_b is not None


class ContingencyTable(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    counts: np.ndarray
    n: int

    @field_validator("counts", mode="before")
    @classmethod
    def coerce_counts(cls, v):
        arr = np.array(v, dtype=np.int64)
        if arr.ndim != 2 or np.any(arr < 0):
            raise_error(ErrorKind.INVALID_PARAMS, "contingency counts must be a non-negative matrix")
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def check_total(self):
        if int(self.counts.sum()) != self.n:
            raise_error(ErrorKind.INVALID_PARAMS, f"contingency counts sum to {self.counts.sum()}, not {self.n}")
        return self
