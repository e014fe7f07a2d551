# tests/test_bundle.py
import json
import os

import numpy as np
import pytest

from app.core import storage
from app.models.trial import EmbeddingMatrix, Partition, TrialBundle
from app.services.bundle_service import BundleService
from app.utils.exceptions import AceError, ErrorKind

from .conftest import make_trial


def _write_manifest(directory, payload):
    path = os.path.join(directory, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    return path


def test_canonicalize_by_first_occurrence():
    rho = BundleService.canonicalize_partition([7, 7, 3, 9, 3])
    assert rho.labels.tolist() == [0, 0, 1, 2, 1]
    assert rho.k == 3


def test_canonicalize_rejects_empty_and_non_integer():
    with pytest.raises(AceError) as exc:
        BundleService.canonicalize_partition([])
    assert exc.value.kind is ErrorKind.EMPTY_INPUT
    with pytest.raises(AceError) as exc:
        BundleService.canonicalize_partition([0.5, 1.0])
    assert exc.value.kind is ErrorKind.PARSE_ERROR


def test_embedding_rejects_non_finite():
    with pytest.raises(AceError) as exc:
        EmbeddingMatrix(values=[[0.0, np.nan], [1.0, 2.0]])
    assert exc.value.kind is ErrorKind.NON_FINITE_VALUE


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_save_load_round_trip(tmp_path, small_bundle, fmt):
    manifest = BundleService.save_bundle(small_bundle, str(tmp_path / fmt), fmt)
    loaded = BundleService.load_bundle(manifest)

    assert loaded.ids == small_bundle.ids
    for before, after in zip(small_bundle.trials, loaded.trials):
        np.testing.assert_array_equal(before.embedding.values, after.embedding.values)
        np.testing.assert_array_equal(before.partition.labels, after.partition.labels)
    np.testing.assert_array_equal(loaded.raw_input.values, small_bundle.raw_input.values)
    np.testing.assert_array_equal(loaded.truth.labels, small_bundle.truth.labels)


def test_binary_layout(tmp_path):
    values = np.arange(6, dtype=np.float64).reshape(3, 2)
    path = str(tmp_path / "m.emb")
    storage.write_matrix(path, values, "binary")
    with open(path, "rb") as fh:
        blob = fh.read()
    assert blob[:4] == b"EMB1"
    assert int.from_bytes(blob[4:12], "little") == 3
    assert int.from_bytes(blob[12:20], "little") == 2
    assert len(blob) == 20 + 6 * 8


def test_truncated_binary_is_parse_error(tmp_path):
    path = str(tmp_path / "bad.emb")
    storage.write_matrix(path, np.ones((4, 3)), "binary")
    with open(path, "rb") as fh:
        blob = fh.read()
    with open(path, "wb") as fh:
        fh.write(blob[:-8])
    with pytest.raises(AceError) as exc:
        storage.read_matrix(path)
    assert exc.value.kind is ErrorKind.PARSE_ERROR


def test_load_resolves_relative_paths(tmp_path):
    np.savetxt(tmp_path / "z.csv", np.eye(3), delimiter=",")
    np.savetxt(tmp_path / "l.csv", [5, 5, 2], fmt="%d")
    manifest = _write_manifest(tmp_path, {"trials": [{"id": "t0", "embedding": "z.csv", "labels": "l.csv"}]})

    bundle = BundleService.load_bundle(str(tmp_path))
    assert bundle.ids == ("t0",)
    assert bundle.trials[0].partition.labels.tolist() == [0, 0, 1]
    assert BundleService.resolve_manifest(str(tmp_path)) == manifest


def test_label_length_mismatch(tmp_path):
    np.savetxt(tmp_path / "z.csv", np.eye(3), delimiter=",")
    np.savetxt(tmp_path / "l.csv", [0, 1], fmt="%d")
    _write_manifest(tmp_path, {"trials": [{"id": "t0", "embedding": "z.csv", "labels": "l.csv"}]})
    with pytest.raises(AceError) as exc:
        BundleService.load_bundle(str(tmp_path))
    assert exc.value.kind is ErrorKind.SHAPE_MISMATCH


def test_metadata_n_is_checked(tmp_path):
    np.savetxt(tmp_path / "z.csv", np.eye(3), delimiter=",")
    np.savetxt(tmp_path / "l.csv", [0, 1, 1], fmt="%d")
    _write_manifest(tmp_path, {
        "trials": [{"id": "t0", "embedding": "z.csv", "labels": "l.csv"}],
        "metadata": {"n": 4},
    })
    with pytest.raises(AceError) as exc:
        BundleService.load_bundle(str(tmp_path))
    assert exc.value.kind is ErrorKind.SHAPE_MISMATCH


def test_missing_file(tmp_path):
    _write_manifest(tmp_path, {"trials": [{"id": "t0", "embedding": "nope.csv", "labels": "l.csv"}]})
    with pytest.raises(AceError) as exc:
        BundleService.load_bundle(str(tmp_path))
    assert exc.value.kind is ErrorKind.MISSING_FILE
    assert exc.value.exit_code == 74


def test_manifest_with_unknown_key_is_parse_error(tmp_path):
    _write_manifest(tmp_path, {"trials": [], "extra": 1})
    with pytest.raises(AceError) as exc:
        BundleService.load_bundle(str(tmp_path))
    assert exc.value.kind is ErrorKind.PARSE_ERROR


def test_bundle_requires_unique_ids_and_same_n():
    x = np.zeros((4, 2))
    x[2:] = 1.0
    with pytest.raises(AceError) as exc:
        TrialBundle(trials=(make_trial("a", x, [0, 0, 1, 1]), make_trial("a", x, [0, 1, 0, 1])))
    assert exc.value.kind is ErrorKind.ID_MISMATCH

    with pytest.raises(AceError) as exc:
        TrialBundle(trials=(make_trial("a", x, [0, 0, 1, 1]), make_trial("b", x[:3], [0, 1, 0])))
    assert exc.value.kind is ErrorKind.SHAPE_MISMATCH


def test_truth_length_is_checked():
    x = np.arange(8, dtype=np.float64).reshape(4, 2)
    with pytest.raises(AceError) as exc:
        TrialBundle(trials=(make_trial("a", x, [0, 0, 1, 1]),), truth=Partition.from_labels([0, 1, 1]))
    assert exc.value.kind is ErrorKind.SHAPE_MISMATCH
