# app/core/random.py
"""
Seeded, splittable random substreams.

Every random draw in the project goes through `substream`, which keys a
counter-based Philox generator by (seed, stream tag, *indices). Two calls
with the same key yield the same draws regardless of call order or thread.
"""
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    DIP_NULL = 1
    SYNTH_TRUTH = 2
    SYNTH_TRIAL = 3
    CONCENTRATION = 4
    SCALE_MISMATCH = 5


def substream(seed: int, stream: Stream, *indices: int) -> np.random.Generator:
    """Return the generator for one (seed, stream, indices) key."""
    sequence = np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(int(stream), *(int(i) for i in indices)),
    )
    return np.random.Generator(np.random.Philox(sequence))
