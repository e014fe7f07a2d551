# app/models/index.py
from enum import Enum

from pydantic import BaseModel, ConfigDict


class Orientation(str, Enum):
    HIGHER = "higher"
    LOWER = "lower"


class IndexId(str, Enum):
    SILHOUETTE_EUCLIDEAN = "silhouette_euclidean"
    SILHOUETTE_COSINE = "silhouette_cosine"
    CALINSKI_HARABASZ = "calinski_harabasz"
    DAVIES_BOULDIN = "davies_bouldin"
    DUNN = "dunn"
    CINDEX = "cindex"
    CCC = "ccc"
    SDBW = "sdbw"
    CDBW = "cdbw"

    @property
    def orientation(self) -> Orientation:
        if self in _LOWER_BETTER:
            return Orientation.LOWER
        return Orientation.HIGHER


_LOWER_BETTER = frozenset({IndexId.DAVIES_BOULDIN, IndexId.CINDEX, IndexId.SDBW})


class IndexValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw: float
    oriented: float

    @classmethod
    def from_raw(cls, index_id: IndexId, raw: float) -> "IndexValue":
        raw = float(raw)
        oriented = -raw if index_id.orientation is Orientation.LOWER else raw
        return cls(raw=raw, oriented=oriented)
