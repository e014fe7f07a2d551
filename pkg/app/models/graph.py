# app/models/graph.py
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.utils.exceptions import ErrorKind, raise_error, raise_shape_mismatch


class LinkMethod(str, Enum):
    PAGERANK = "pagerank"
    HITS = "hits"


class Edge(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    weight: float
    p_value: Optional[float] = None


class CorrelationGraph(BaseModel):
    """Undirected graph over one subgroup; weights[a, b] > 0 only for kept edges"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    members: Tuple[int, ...]
    weights: np.ndarray
    pvalues: np.ndarray

    @model_validator(mode="after")
    def check_weights(self):
        k = len(self.members)
        if self.weights.shape != (k, k) or self.pvalues.shape != (k, k):
            raise_shape_mismatch(f"graph matrices must be {k} x {k}")
        if np.any(self.weights < 0) or np.any(np.diag(self.weights) != 0):
            raise_error(ErrorKind.INVALID_PARAMS, "edge weights must be non-negative without self-loops")
        if not np.array_equal(self.weights, self.weights.T):
            raise_error(ErrorKind.INVALID_PARAMS, "edge weights must be symmetric")
        self.weights.flags.writeable = False
        self.pvalues.flags.writeable = False
        return self

    @property
    def size(self) -> int:
        return len(self.members)

    def edges(self) -> List[Edge]:
        """Kept edges as (member i, member j, weight, p-value), i < j."""
        out = []
        for a in range(self.size):
            for b in range(a + 1, self.size):
                if self.weights[a, b] > 0:
                    p = self.pvalues[a, b]
                    out.append(Edge(
                        i=self.members[a],
                        j=self.members[b],
                        weight=float(self.weights[a, b]),
                        p_value=None if np.isnan(p) else float(p),
                    ))
        return out


class LinkWeights(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def check_distribution(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise_error(ErrorKind.EMPTY_SUBGROUP, "link weights need at least one vertex")
        if np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
            raise_error(ErrorKind.INVALID_PARAMS, "link weights must be non-negative and sum to 1")
        arr.flags.writeable = False
        return arr

    @classmethod
    def uniform(cls, size: int) -> "LinkWeights":
        return cls(values=np.full(size, 1.0 / size))
