# app/services/synth_service.py
"""
Synthetic trial bundles and small-scale demonstrations.

Every draw comes from `app.core.random.substream`, so a bundle is fully
determined by its SynthSpec and generation order does not matter.
"""
import logging
from concurrent.futures import Executor
from typing import List, Optional, Sequence

import numpy as np

from app.core.random import Stream, substream
from app.models.synth import ConcentrationStats, SynthSpec
from app.models.trial import EmbeddingMatrix, Partition, Trial, TrialBundle
from app.services.index_service import IndexService
from app.utils.array_helpers import distances_to
from app.utils.exceptions import raise_invalid_params

logger = logging.getLogger(__name__)

RAW_SEPARATION = 6.0

# Scale-mismatch fixture
MISMATCH_PER_CLUSTER = 60
MISMATCH_OFFSET = 6.0
MISMATCH_FLIPS = 4
MISMATCH_SQUEEZE = 0.1


def _balanced_labels(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(n) % k)


def _random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _centers(k: int, d: int, separation: float) -> np.ndarray:
    """k centers with pairwise distance `separation` (on a line when d < k)."""
    centers = np.zeros((k, d))
    if d >= k:
        centers[np.arange(k), np.arange(k)] = separation / np.sqrt(2.0)
    else:
        centers[:, 0] = separation * np.arange(k)
    return centers


def _mixture(truth: np.ndarray, k: int, d: int, separation: float, rng: np.random.Generator) -> np.ndarray:
    points = _centers(k, d, separation)[truth] + rng.standard_normal((truth.size, d))
    return points @ _random_rotation(d, rng)


def _flip_labels(truth: np.ndarray, k: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    labels = truth.copy()
    count = int(round(fraction * truth.size))
    if count == 0 or k < 2:
        return labels
    chosen = rng.choice(truth.size, size=count, replace=False)
    labels[chosen] = (labels[chosen] + rng.integers(1, k, size=count)) % k
    return labels


class SynthService:
    @staticmethod
    def generate_trial(spec: SynthSpec, truth: np.ndarray, index: int) -> Trial:
        """
        One synthetic trial

        Args:
            spec: Bundle description
            truth: Shared component assignment of the n observations
            index: Trial position, which keys its random substream

        Returns:
            Trial whose embedding is the seeded mixture (or unimodal noise when
            the trial is corrupted) and whose labels are truth with flips
        """
        rng = substream(spec.seed, Stream.SYNTH_TRIAL, index)
        labels = _flip_labels(truth, spec.k, spec.noise(index), rng)
        if index in spec.corrupt:
            values = rng.standard_normal((spec.n, spec.d))
        else:
            values = _mixture(truth, spec.k, spec.d, spec.separation(index), rng)
        return Trial(
            id=f"trial_{index:03d}",
            embedding=EmbeddingMatrix(values=values),
            partition=Partition.from_labels(labels),
        )

    @staticmethod
    def generate_bundle(spec: SynthSpec, executor: Optional[Executor] = None) -> TrialBundle:
        truth_rng = substream(spec.seed, Stream.SYNTH_TRUTH, 0)
        truth = _balanced_labels(spec.n, spec.k, truth_rng)
        raw = _mixture(truth, spec.k, spec.d, RAW_SEPARATION, substream(spec.seed, Stream.SYNTH_TRUTH, 1))

        def build(i: int) -> Trial:
            return SynthService.generate_trial(spec, truth, i)

        indices = range(spec.m)
        trials = list(executor.map(build, indices)) if executor else [build(i) for i in indices]
        logger.info(
            f"Generated {spec.m} trials (n={spec.n}, d={spec.d}, k={spec.k}, corrupt={sorted(spec.corrupt)})"
        )
        return TrialBundle(
            trials=tuple(trials),
            raw_input=EmbeddingMatrix(values=raw),
            truth=Partition.from_labels(truth),
            dataset="synthetic",
        )

    @staticmethod
    def concentration_demo(n: int, dims: Sequence[int], reps: int, seed: int) -> ConcentrationStats:
        """
        Distance concentration in the unit cube

        For each dimension p and repetition, draws n uniform points and one
        query point, records d_max / d_min from the query, and the absolute
        silhouette of a random balanced 2-partition of the n points.
        """
        dims = [int(p) for p in dims]
        if not dims or reps < 1 or n < 4 or any(p < 1 for p in dims):
            raise_invalid_params(f"need dims >= 1, reps >= 1 and n >= 4 (got dims={dims}, reps={reps}, n={n})")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise_invalid_params(f"dims must be strictly ascending, got {dims}")

        ratios: List[float] = []
        silhouettes: List[float] = []
        for p in dims:
            per_p_ratio = np.empty(reps)
            per_p_index = np.empty(reps)
            for rep in range(reps):
                rng = substream(seed, Stream.CONCENTRATION, p, rep)
                points = rng.uniform(size=(n, p))
                query = rng.uniform(size=(1, p))
                dist = distances_to(points, query)[:, 0]
                per_p_ratio[rep] = dist.max() / dist.min()
                halves = _balanced_labels(n, 2, rng)
                value = IndexService.silhouette(EmbeddingMatrix(values=points), Partition.from_labels(halves))
                per_p_index[rep] = abs(value.oriented)
            ratios.append(float(np.median(per_p_ratio)))
            silhouettes.append(float(np.median(per_p_index)))
            logger.debug(f"p={p}: median ratio {ratios[-1]:.4f}, median |silhouette| {silhouettes[-1]:.5f}")

        return ConcentrationStats(dims=dims, ratio_median=ratios, index_abs_median=silhouettes)

    @staticmethod
    def make_scale_mismatch_pair(seed: int = 0) -> TrialBundle:
        """
        Two trials over the same two blobs where the paired score misleads

        Trial A keeps the blobs as they are but mislabels the points nearest
        the boundary. Trial B labels everything correctly but its space squeezes
        the separating axis, so its own-space score is lower than A's.
        """
        rng = substream(seed, Stream.SCALE_MISMATCH, 0)
        truth = np.repeat([0, 1], MISMATCH_PER_CLUSTER)
        x = rng.standard_normal((truth.size, 2))
        x[:, 0] += np.where(truth == 0, -MISMATCH_OFFSET, MISMATCH_OFFSET)

        flipped = truth.copy()
        left = np.flatnonzero(truth == 0)
        right = np.flatnonzero(truth == 1)
        flipped[left[np.argsort(x[left, 0])[-MISMATCH_FLIPS:]]] = 1
        flipped[right[np.argsort(x[right, 0])[:MISMATCH_FLIPS]]] = 0

        squeezed = x.copy()
        squeezed[:, 0] *= MISMATCH_SQUEEZE

        return TrialBundle(
            trials=(
                Trial(id="A", embedding=EmbeddingMatrix(values=x), partition=Partition.from_labels(flipped)),
                Trial(id="B", embedding=EmbeddingMatrix(values=squeezed), partition=Partition.from_labels(truth)),
            ),
            raw_input=EmbeddingMatrix(values=x),
            truth=Partition.from_labels(truth),
            dataset="scale_mismatch",
        )
