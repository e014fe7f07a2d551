# app/services/bundle_service.py
import logging
import os
from typing import Optional

from app.core import storage
from app.core.config import settings
from app.models.trial import EmbeddingMatrix, Partition, Trial, TrialBundle
from app.schemas.manifest import BundleManifest, ManifestMetadata, TrialEntry
from app.utils.exceptions import raise_shape_mismatch

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class BundleService:
    @staticmethod
    def resolve_manifest(path: str) -> str:
        """Accept either a bundle directory or the manifest file itself"""
        if os.path.isdir(path):
            return os.path.join(path, MANIFEST_NAME)
        return path

    @staticmethod
    def canonicalize_partition(labels) -> Partition:
        """Remap labels to 0..k-1 by first occurrence"""
        return Partition.from_labels(labels)

    @staticmethod
    def load_bundle(manifest_path: str) -> TrialBundle:
        manifest_path = BundleService.resolve_manifest(manifest_path)
        manifest = storage.read_manifest(manifest_path)
        base = os.path.dirname(os.path.abspath(manifest_path))

        def resolve(rel: str) -> str:
            return rel if os.path.isabs(rel) else os.path.join(base, rel)

        trials = []
        for entry in manifest.trials:
            embedding = EmbeddingMatrix(values=storage.read_matrix(resolve(entry.embedding)))
            labels = storage.read_labels(resolve(entry.labels))
            if labels.size != embedding.n:
                raise_shape_mismatch(
                    f"trial '{entry.id}': labels file has {labels.size} entries for {embedding.n} embedding rows"
                )
            trials.append(Trial(
                id=entry.id,
                embedding=embedding,
                partition=BundleService.canonicalize_partition(labels),
            ))

        raw_input = None
        if manifest.raw_input:
            raw_input = EmbeddingMatrix(values=storage.read_matrix(resolve(manifest.raw_input)))
        truth = None
        if manifest.truth:
            truth = BundleService.canonicalize_partition(storage.read_labels(resolve(manifest.truth)))

        metadata = manifest.metadata
        if metadata is not None:
            BundleService._check_metadata(metadata, trials, truth)

        bundle = TrialBundle(
            trials=tuple(trials),
            raw_input=raw_input,
            truth=truth,
            dataset=metadata.dataset if metadata else None,
        )
        logger.info(f"Loaded bundle {manifest_path}: M={bundle.m}, n={bundle.n}")
        return bundle

    @staticmethod
    def _check_metadata(metadata: ManifestMetadata, trials, truth: Optional[Partition]):
        if metadata.n is not None:
            for trial in trials:
                if trial.partition.n != metadata.n:
                    raise_shape_mismatch(
                        f"trial '{trial.id}' has {trial.partition.n} labels, metadata declares n={metadata.n}"
                    )
        if metadata.k is not None and truth is not None and truth.k != metadata.k:
            raise_shape_mismatch(f"truth has K={truth.k}, metadata declares K={metadata.k}")

    @staticmethod
    def save_bundle(bundle: TrialBundle, directory: str, fmt: Optional[str] = None) -> str:
        """Write matrix/label files plus manifest.json; returns the manifest path"""
        fmt = fmt or settings.matrix_format
        ext = storage.MATRIX_EXTENSIONS.get(fmt, ".csv")
        os.makedirs(directory, exist_ok=True)

        entries = []
        for i, trial in enumerate(bundle.trials):
            emb_name = f"trial_{i:03d}_embedding{ext}"
            lab_name = f"trial_{i:03d}_labels.csv"
            storage.write_matrix(os.path.join(directory, emb_name), trial.embedding.values, fmt)
            storage.write_labels(os.path.join(directory, lab_name), trial.partition.labels)
            entries.append(TrialEntry(id=trial.id, embedding=emb_name, labels=lab_name))

        raw_name = truth_name = None
        if bundle.raw_input is not None:
            raw_name = f"raw_input{ext}"
            storage.write_matrix(os.path.join(directory, raw_name), bundle.raw_input.values, fmt)
        if bundle.truth is not None:
            truth_name = "truth.csv"
            storage.write_labels(os.path.join(directory, truth_name), bundle.truth.labels)

        metadata = ManifestMetadata(
            dataset=bundle.dataset,
            n=bundle.n,
            k=bundle.truth.k if bundle.truth is not None else None,
        )
        manifest = BundleManifest(trials=entries, raw_input=raw_name, truth=truth_name, metadata=metadata)
        path = os.path.join(directory, MANIFEST_NAME)
        storage.write_manifest(path, manifest)
        logger.info(f"Saved bundle with {bundle.m} trials to {directory}")
        return path

