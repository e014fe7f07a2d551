# app/core/storage.py
"""
File storage for matrices, label vectors and bundle manifests.

Matrices come either as headerless decimal CSV or as the EMB1 binary
layout: magic b"EMB1", u64 LE rows, u64 LE cols, then rows*cols float64 LE
values in row-major order.
"""
import csv
import json
import logging
import os
import struct
from typing import List, Tuple

import numpy as np
from pydantic import ValidationError

from app.models.pipeline import AceReport
from app.schemas.manifest import BundleManifest
from app.utils.exceptions import ErrorKind, raise_error, raise_missing_file, raise_parse_error
from app.utils.report_helpers import none_to_nan, score_matrix_csv
from app.utils.validators import validate_finite

logger = logging.getLogger(__name__)

MAGIC = b"EMB1"
HEADER = struct.Struct("<4sQQ")
FLOAT_LE = np.dtype("<f8")

MATRIX_EXTENSIONS = {"binary": ".emb", "csv": ".csv"}


def _require_file(path: str):
    if not os.path.isfile(path):
        raise_missing_file(path)


def read_matrix(path: str) -> np.ndarray:
    """Read a CSV or EMB1 matrix as a C-ordered float64 array."""
    _require_file(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        values = _read_binary(path)
    else:
        values = _read_csv(path)
    validate_finite(values, path)
    return values


def _read_binary(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < HEADER.size:
        raise_parse_error(path, "truncated EMB1 header")
    _, rows, cols = HEADER.unpack_from(blob, 0)
    expected = rows * cols * FLOAT_LE.itemsize
    payload = blob[HEADER.size:]
    if len(payload) != expected:
        raise_parse_error(path, f"expected {expected} payload bytes for {rows}x{cols}, found {len(payload)}")
    if rows == 0 or cols == 0:
        raise_error(ErrorKind.EMPTY_INPUT, f"{path} declares an empty {rows}x{cols} matrix")
    values = np.frombuffer(payload, dtype=FLOAT_LE).reshape(rows, cols)
    return values.astype(np.float64, order="C", copy=True)


def _read_csv(path: str) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise_parse_error(path, str(exc))
    if values.size == 0:
        raise_error(ErrorKind.EMPTY_INPUT, f"{path} contains no values")
    return np.ascontiguousarray(values)


def write_matrix(path: str, values: np.ndarray, fmt: str = "binary") -> None:
    values = np.ascontiguousarray(values, dtype=np.float64)
    if fmt == "binary":
        rows, cols = values.shape
        with open(path, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, rows, cols))
            fh.write(values.astype(FLOAT_LE).tobytes(order="C"))
    elif fmt == "csv":
        np.savetxt(path, values, delimiter=",", fmt="%.17g")
    else:
        raise_error(ErrorKind.USAGE_ERROR, f"unknown matrix format '{fmt}'")


def read_labels(path: str) -> np.ndarray:
    """Read one integer label per line."""
    _require_file(path)
    try:
        labels = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise_parse_error(path, str(exc))
    if labels.ndim != 1:
        raise_parse_error(path, "expected one label per line")
    if labels.size == 0:
        raise_error(ErrorKind.EMPTY_INPUT, f"{path} contains no labels")
    return labels


def write_labels(path: str, labels: np.ndarray) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def read_manifest(path: str) -> BundleManifest:
    _require_file(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return BundleManifest.model_validate_json(fh.read())
    except ValidationError as exc:
        raise_parse_error(path, str(exc))


def write_manifest(path: str, manifest: BundleManifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.model_dump_json(indent=2, exclude_none=True))
        fh.write("\n")


def read_json(path: str) -> dict:
    _require_file(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise_parse_error(path, str(exc))


def read_report(path: str) -> AceReport:
    _require_file(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return AceReport.model_validate_json(fh.read())
    except ValidationError as exc:
        raise_parse_error(path, str(exc))


def write_report(path: str, report: AceReport) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.model_dump_json(indent=2))
        fh.write("\n")
    logger.info(f"Report written to {path}")


def write_score_matrix(path: str, report: AceReport) -> None:
    """M x M oriented scores of a report as headerless CSV, NA for missing cells"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    values = np.array([none_to_nan(row) for row in report.score_matrix])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(score_matrix_csv(values))
    logger.info(f"Score matrix written to {path}")


def read_external_table(path: str) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """
    Read a `trial_id,nmi,acc` CSV

    Returns:
        Trial ids in file order plus the NMI and ACC columns
    """
    _require_file(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0]] != ["trial_id", "nmi", "acc"]:
        raise_parse_error(path, "expected header trial_id,nmi,acc")
    ids, nmi, acc = [], [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise_parse_error(path, f"line {line}: expected 3 fields, got {len(row)}")
        try:
            nmi.append(float(row[1]))
            acc.append(float(row[2]))
        except ValueError:
            raise_parse_error(path, f"line {line}: non-numeric external value")
        ids.append(row[0].strip())
    return ids, np.array(nmi), np.array(acc)
