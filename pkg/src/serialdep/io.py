"""CSV ingestion of univariate and multivariate series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["DataError", "SeriesData", "read_series"]


class DataError(ValueError):
    """Input data that cannot be used (bad cells, too few rows, ...)."""


@dataclass
class SeriesData:
    values: np.ndarray  # (n, d)
    labels: list[str]

    @property
    def univariate(self) -> np.ndarray:
        if self.values.shape[1] != 1:
            raise DataError(f"expected one column, found {self.values.shape[1]}")
        return self.values[:, 0]


def _parse(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v


def read_series(path, log: bool = False, diff: bool = False) -> SeriesData:
    """Read a numeric CSV, one column per component.

    A first row that does not parse as numbers is taken as the header.
    ``log`` applies the natural logarithm and ``diff`` the first difference,
    in that order.  Missing, non-numeric or non-finite cells, ragged rows and
    fewer than two usable rows raise :class:`DataError`.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data")
    first = [c.strip() for c in rows[0]]
    width = len(first)
    if all(_parse(c) is not None for c in first):
        labels = [f"x{i + 1}" for i in range(width)]
        body = rows
        offset = 1
    else:
        labels = first
        body = rows[1:]
        offset = 2
    values = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(f"{path}: line {i + offset} has {len(row)} fields, expected {width}")
        for k, cell in enumerate(row):
            v = _parse(cell.strip())
            if v is None or not math.isfinite(v):
                raise DataError(f"{path}: line {i + offset}, column {k + 1}: not a finite number: {cell!r}")
            values[i, k] = v
    if log:
        if np.any(values <= 0.0):
            raise DataError(f"{path}: log transform needs positive values")
        values = np.log(values)
    if diff:
        values = np.diff(values, axis=0)
    if values.shape[0] < 2:
        raise DataError(f"{path}: fewer than 2 usable rows")
    return SeriesData(values, labels)
