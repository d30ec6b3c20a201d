"""Prediction matrices and their CSV representation.

The on-disk layout is one row per model: the first column holds the model id
and the header row holds the sample ids.  ``orientation="samples"`` reads the
transposed layout (one row per sample) that score files are often shipped in.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import InputError


@dataclass(frozen=True)
class PredictionMatrix:
    """``d x n`` matrix of raw predictions (rows are models, columns samples)."""

    values: np.ndarray
    model_ids: tuple = field(default=())
    sample_ids: tuple = field(default=())

    def __post_init__(self):
        # private copy: the stored array is frozen, the caller's is left alone
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError("prediction matrix must be 2-D, got shape %s" % (values.shape,))
        d, n = values.shape
        if d < 2 or n < 2:
            raise InputError("need at least 2 models and 2 samples, got %d x %d" % (d, n))
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise InputError("non-finite prediction at model row %d, sample column %d" % tuple(bad))
        model_ids = tuple(str(m) for m in self.model_ids) or tuple("model_%d" % i for i in range(d))
        sample_ids = tuple(str(s) for s in self.sample_ids) or tuple("sample_%d" % j for j in range(n))
        if len(model_ids) != d or len(sample_ids) != n:
            raise InputError("id lengths (%d, %d) do not match matrix shape %s"
                             % (len(model_ids), len(sample_ids), values.shape))
        for kind, ids in (("model", model_ids), ("sample", sample_ids)):
            if len(set(ids)) != len(ids):
                raise InputError("duplicate %s ids" % kind)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "model_ids", model_ids)
        object.__setattr__(self, "sample_ids", sample_ids)

    @property
    def shape(self):
        return self.values.shape

    def select_models(self, mask) -> "PredictionMatrix":
        mask = np.asarray(mask)
        ids = [m for m, keep in zip(self.model_ids, mask) if keep]
        return PredictionMatrix(self.values[mask], ids, self.sample_ids)

    def select_samples(self, index) -> "PredictionMatrix":
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        return PredictionMatrix(self.values[:, index], self.model_ids,
                                [self.sample_ids[j] for j in index])


def as_prediction_matrix(Y) -> PredictionMatrix:
    if isinstance(Y, PredictionMatrix):
        return Y
    return PredictionMatrix(np.asarray(Y, dtype=float))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_matrix_csv(Y: PredictionMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model_id", *Y.sample_ids])
        for mid, row in zip(Y.model_ids, Y.values):
            writer.writerow([mid, *map(_fmt, row)])


def read_matrix_csv(path, orientation: str = "models") -> PredictionMatrix:
    """Parse a prediction CSV, raising :class:`InputError` with line context."""
    if orientation not in ("models", "samples"):
        raise InputError("orientation must be 'models' or 'samples'")
    if not os.path.exists(path):
        raise InputError("input file not found: %s" % path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 3:
        raise InputError("%s: need a header and at least two data rows" % path)
    header = rows[0]
    col_ids = header[1:]
    row_ids, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError("%s: line %d has %d fields, expected %d"
                             % (path, lineno, len(row), len(header)))
        row_ids.append(row[0])
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError as exc:
            raise InputError("%s: line %d: %s" % (path, lineno, exc)) from None
    arr = np.array(values, dtype=float)
    if orientation == "models":
        return PredictionMatrix(arr, row_ids, col_ids)
    return PredictionMatrix(arr.T, col_ids, row_ids)


def read_vector_csv(path) -> tuple[list, np.ndarray]:
    """Read a two-column ``id,value`` CSV (header row required)."""
    if not os.path.exists(path):
        raise InputError("file not found: %s" % path)
    ids, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise InputError("%s: line %d: expected id,value" % (path, lineno))
            ids.append(row[0])
            try:
                vals.append(float(row[1]))
            except ValueError as exc:
                raise InputError("%s: line %d: %s" % (path, lineno, exc)) from None
    return ids, np.array(vals)


def write_columns_csv(path, header: Sequence[str], columns: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])

