"""Multivariate time-series panels and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PanelParseError


@dataclass(frozen=True, eq=False)
class TimeSeriesPanel:
    """A p x n observation matrix: rows are component series, columns are time points.

    The array is stored in Fortran order so that each time point is a
    contiguous column, and is made read-only on construction.
    """

    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float, order="F", copy=True)
        if values.ndim != 2:
            raise ValueError(f"panel must be 2-dimensional, got shape {values.shape}")
        p, n = values.shape
        if p < 1 or n < 2:
            raise ValueError(f"panel needs p >= 1 and n >= 2, got p={p}, n={n}")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains non-finite values")
        if self.centered:
            tol = 1e-10 * n * max(np.abs(values).max(), 1.0)
            worst = np.abs(values.sum(axis=1)).max()
            if worst > tol:
                raise ValueError(f"panel flagged centered but a row sums to {worst:.3g}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __repr__(self):
        return f"TimeSeriesPanel(p={self.p}, n={self.n}, centered={self.centered})"


def center(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Subtract each row's sample mean. A panel already flagged centered is returned as is."""
    if panel.centered:
        return panel
    x = panel.values
    return TimeSeriesPanel(x - x.mean(axis=1, keepdims=True), centered=True)


def load_csv(path, has_header: bool = False) -> TimeSeriesPanel:
    """Read a CSV whose rows are time points and columns are series.

    Raises
    ------
    PanelParseError
        On an empty file, ragged rows or a non-numeric cell. The error
        carries the offending 1-based line number.
    """
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise PanelParseError(
                    f"expected {width} fields, found {len(record)}", line=lineno
                )
            try:
                rows.append([float(cell) for cell in record])
            except ValueError:
                bad = next(c for c in record if not _is_float(c))
                raise PanelParseError(f"non-numeric cell {bad!r}", line=lineno) from None
    if not rows:
        raise PanelParseError(f"{path} contains no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[0] < 2:
        raise PanelParseError(f"{path} has a single time point; need n >= 2")
    if not np.all(np.isfinite(data)):
        raise PanelParseError(f"{path} contains non-finite values")
    return TimeSeriesPanel(data.T)


def save_csv(panel: TimeSeriesPanel, path, header: bool = False) -> None:
    """Write ``panel`` with one row per time point (the inverse of :func:`load_csv`)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{i + 1}" for i in range(panel.p)])
        for col in panel.values.T:
            writer.writerow([repr(float(v)) for v in col])


def _is_float(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True
