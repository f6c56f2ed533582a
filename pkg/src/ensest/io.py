"""Deterministic file emitters and the sample-CSV reader.

Result CSVs start with two comment lines: ``#schema=1`` (column-layout
version) and ``#config=<canonical JSON>`` (exact run configuration).
JSON summaries carry the same config echo.  Nothing time- or
host-dependent is written, so identical configs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_results_csv(path: str | Path, fieldnames: list[str], rows: list[dict],
                      config: dict) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"#schema={SCHEMA_VERSION}\n")
        fh.write(f"#config={canonical_json(config)}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_summary_json(path: str | Path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")


def read_samples_csv(path: str | Path) -> np.ndarray:
    """Load sample points: one point per row, d numeric columns.

    A single leading non-numeric row is treated as a header.  Any other
    malformed row (wrong column count, non-numeric field) raises with its
    1-based line number.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with path.open(newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            try:
                values = [float(v) for v in record]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}:{lineno}: non-numeric field in row {record!r}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no sample rows found")
    return np.asarray(rows, dtype=np.float64)
