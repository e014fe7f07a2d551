# app/models/synth.py
from typing import FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from app.utils.exceptions import ErrorKind, raise_error


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    n: int
    d: int
    k: int
    separations: Optional[Tuple[float, ...]] = None
    corrupt: FrozenSet[int] = frozenset()
    label_noise: Optional[Tuple[float, ...]] = None
    seed: int = 0

    @model_validator(mode="after")
    def check_spec(self):
        if self.m < 1 or self.d < 1 or self.k < 1 or self.n < self.k:
            raise_error(ErrorKind.INVALID_SPEC, f"need m, d, k >= 1 and n >= k (m={self.m}, n={self.n}, d={self.d}, k={self.k})")
        if self.seed < 0:
            raise_error(ErrorKind.INVALID_SPEC, "seed must be non-negative")
        if self.separations is not None:
            if len(self.separations) != self.m or any(s <= 0 for s in self.separations):
                raise_error(ErrorKind.INVALID_SPEC, "separations need one positive value per trial")
        if self.label_noise is not None:
            if len(self.label_noise) != self.m or any(not 0.0 <= f < 1.0 for f in self.label_noise):
                raise_error(ErrorKind.INVALID_SPEC, "label_noise needs one fraction in [0, 1) per trial")
        if any(not 0 <= i < self.m for i in self.corrupt):
            raise_error(ErrorKind.INVALID_SPEC, f"corrupt indices must lie in 0..{self.m - 1}")
        return self

    def separation(self, trial: int) -> float:
        return 6.0 if self.separations is None else float(self.separations[trial])

    def noise(self, trial: int) -> float:
        return 0.0 if self.label_noise is None else float(self.label_noise[trial])


class ConcentrationStats(BaseModel):
    dims: List[int]
    ratio_median: List[float]
    index_abs_median: List[float]
