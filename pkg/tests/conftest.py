# tests/conftest.py
import numpy as np
import pytest

from app.models.index import IndexId
from app.models.pipeline import AceConfig
from app.models.synth import SynthSpec
from app.models.trial import EmbeddingMatrix, Partition, Trial, TrialBundle
from app.services.synth_service import SynthService


def make_trial(trial_id: str, values, labels) -> Trial:
    return Trial(
        id=trial_id,
        embedding=EmbeddingMatrix(values=np.asarray(values, dtype=np.float64)),
        partition=Partition.from_labels(labels),
    )


def blobs(rng: np.random.Generator, k: int = 3, per_cluster: int = 20, d: int = 2, offset: float = 8.0):
    """k well-separated Gaussian blobs along the first axis and their labels."""
    labels = np.repeat(np.arange(k), per_cluster)
    x = rng.standard_normal((labels.size, d))
    x[:, 0] += offset * labels
    return x, labels


@pytest.fixture
def line_points():
    """The 1-D dataset {0, 1 | 10, 11}."""
    z = EmbeddingMatrix(values=np.array([[0.0], [1.0], [10.0], [11.0]]))
    rho = Partition.from_labels([0, 0, 1, 1])
    return z, rho


@pytest.fixture
def blob_data():
    return blobs(np.random.default_rng(7))


@pytest.fixture
def small_bundle():
    spec = SynthSpec(
        m=6,
        n=150,
        d=8,
        k=3,
        seed=11,
        corrupt=frozenset({1, 4}),
        label_noise=(0.0, 0.05, 0.1, 0.15, 0.2, 0.3),
        separations=(10.0,) * 6,
    )
    return SynthService.generate_bundle(spec)


@pytest.fixture
def fast_config():
    return AceConfig(index=IndexId.SILHOUETTE_EUCLIDEAN, dip_replicates=200, seed=3)


@pytest.fixture
def two_trial_bundle():
    rng = np.random.default_rng(5)
    x, labels = blobs(rng, k=2, per_cluster=10)
    shuffled = rng.permutation(labels)
    return TrialBundle(
        trials=(make_trial("a", x, labels), make_trial("b", x, shuffled)),
        raw_input=EmbeddingMatrix(values=x),
        truth=Partition.from_labels(labels),
    )
