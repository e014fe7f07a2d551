# app/utils/report_helpers.py
"""
Export utilities for reports, score matrices and regime tables
"""
import csv
import io
import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

NA = "NA"


def nan_to_none(values: Iterable[float]) -> List[Optional[float]]:
    """
    Convert a numeric vector to JSON-ready floats

    Args:
        values: Numbers, NaN marking missing entries

    Returns:
        List with None in place of NaN
    """
    return [None if v is None or math.isnan(v) else float(v) for v in values]


def none_to_nan(values: Iterable[Optional[float]]) -> np.ndarray:
    """Inverse of nan_to_none"""
    return np.array([np.nan if v is None else v for v in values], dtype=np.float64)


def matrix_to_rows(matrix: np.ndarray) -> List[List[Optional[float]]]:
    return [nan_to_none(row) for row in np.asarray(matrix, dtype=np.float64)]


def format_value(value: Optional[float]) -> str:
    """Shortest round-tripping decimal text, NA for missing"""
    if value is None or math.isnan(value):
        return NA
    return repr(float(value))


def to_csv(header: Optional[Sequence[str]], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) if isinstance(v, float) or v is None else v for v in row])
    return buffer.getvalue()


def score_matrix_csv(values: np.ndarray) -> str:
    """M rows x M columns, no header, NA for missing"""
    return to_csv(None, ([float(v) for v in row] for row in np.asarray(values, dtype=np.float64)))


def regime_table_csv(rows) -> str:
    """Regime table with columns regime, external, r_s, tau_b"""
    return to_csv(
        ["regime", "external", "r_s", "tau_b"],
        ([r.regime.value, r.external.value, r.r_s, r.tau_b] for r in rows),
    )


def baselines_csv(trial_ids: Sequence[str], columns: Dict[str, Optional[np.ndarray]]) -> str:
    """One row per trial; a column that is None prints NA throughout"""
    header = ["trial_id", *columns.keys()]
    body = []
    for i, trial_id in enumerate(trial_ids):
        row = [trial_id]
        for values in columns.values():
            row.append(None if values is None else float(values[i]))
        body.append(row)
    return to_csv(header, body)
