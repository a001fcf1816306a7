"""Dataset containers and loaders: CSV, the three-blob synthetic set, and
the UCI-layout wine file."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    EmptyData,
    NonPositiveWeight,
    ParseError,
    RaggedRows,
    UnexpectedRowCount,
    ValidationError,
)

WINE_EXPECTED_ROWS = 178
WINE_ATTRIBUTES = 13

# Fixed generator geometry so synthetic runs are reproducible: three
# round blobs of 100 points whose height (second coordinate) doubles as
# the point weight.
_BLOB_CENTERS = np.array([[2.0, 2.0], [5.0, 6.0], [8.0, 10.0]])
_BLOB_STD = 0.6
_BLOB_SIZE = 100


@dataclass(frozen=True)
class Dataset:
    """Features plus per-point weights and optional ground-truth labels."""

    features: np.ndarray
    weights: np.ndarray
    true_labels: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (features.shape[0],):
            raise ValidationError(
                f"weights shape {weights.shape} does not match {features.shape[0]} points"
            )
        labels = self.true_labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (features.shape[0],):
                raise ValidationError(
                    f"labels shape {labels.shape} does not match {features.shape[0]} points"
                )
            labels.setflags(write=False)
        features.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "true_labels", labels)

    @property
    def n_points(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"row {row}, column {column!r}: cannot parse {text!r} as a number"
        ) from None


def load_csv(path, weight_column: Optional[str] = None,
             label_column: Optional[str] = None, name: str = "") -> Dataset:
    """Read a headered, comma-separated dataset.

    The named weight column becomes the point weights (all ones when
    absent); the named label column becomes integer ground-truth labels;
    every other column must be numeric and becomes a feature.  Error
    messages carry the offending row and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyData(f"{path}: file has no rows")
    header = [cell.strip() for cell in rows[0]]
    for wanted, role in ((weight_column, "weight"), (label_column, "label")):
        if wanted is not None and wanted not in header:
            raise ParseError(f"{role} column {wanted!r} not found in header {header}")

    feature_names = [
        h for h in header if h not in (weight_column, label_column)
    ]
    features = []
    weights = []
    labels = []
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RaggedRows(
                f"row {number} has {len(row)} cells, header has {len(header)}"
            )
        record = dict(zip(header, (cell.strip() for cell in row)))
        features.append([_parse_cell(record[h], number, h) for h in feature_names])
        if weight_column is not None:
            value = _parse_cell(record[weight_column], number, weight_column)
            if value <= 0:
                raise NonPositiveWeight(
                    f"row {number}, column {weight_column!r}: weight {value:g} is not > 0"
                )
            weights.append(value)
        if label_column is not None:
            labels.append(int(_parse_cell(record[label_column], number, label_column)))

    count = len(features)
    return Dataset(
        features=np.array(features, dtype=float).reshape(count, len(feature_names)),
        weights=np.array(weights) if weight_column is not None else np.ones(count),
        true_labels=np.array(labels, dtype=np.int64) if label_column is not None else None,
        name=name or str(path),
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the format :func:`load_csv` reads back.

    Numbers are written with shortest round-trip formatting, so a
    save/load cycle reproduces every value bit for bit.
    """
    header = [f"f{i}" for i in range(dataset.n_features)] + ["weight"]
    if dataset.true_labels is not None:
        header.append("label")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for j in range(dataset.n_points):
            row = [repr(float(v)) for v in dataset.features[j]]
            row.append(repr(float(dataset.weights[j])))
            if dataset.true_labels is not None:
                row.append(str(int(dataset.true_labels[j])))
            writer.writerow(row)


def generate_synthetic(seed: int) -> Dataset:
    """Three Gaussian blobs in the plane, 100 points each.

    Weights equal each point's second coordinate (shifted, if a draw
    ever dips that low, so all weights stay positive); labels are the
    blob indices.  Identical seeds give identical datasets.
    """
    rng = np.random.default_rng(seed)
    points = np.vstack([
        center + _BLOB_STD * rng.standard_normal((_BLOB_SIZE, 2))
        for center in _BLOB_CENTERS
    ])
    low = points[:, 1].min()
    if low <= 0.0:
        points[:, 1] += 1e-6 - low
    labels = np.repeat(np.arange(len(_BLOB_CENTERS)), _BLOB_SIZE)
    return Dataset(
        features=points,
        weights=points[:, 1].copy(),
        true_labels=labels,
        name=f"synthetic-blobs(seed={seed})",
    )


def load_wine(path) -> Dataset:
    """Read the wine file: class label (1-3) first, then 13 attributes.

    No header is expected; a non-numeric first cell is treated as one
    and skipped.  Weights are the raw alcohol values (the first
    attribute); labels are shifted to 0-based.  A row count other than
    178 is reported as an :class:`UnexpectedRowCount` warning, not a
    failure.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyData(f"{path}: file has no rows")
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    if not rows:
        raise EmptyData(f"{path}: file has a header but no data rows")

    features = []
    labels = []
    for number, row in enumerate(rows, start=1):
        if len(row) != WINE_ATTRIBUTES + 1:
            raise RaggedRows(
                f"row {number} has {len(row)} cells, expected {WINE_ATTRIBUTES + 1}"
            )
        label = int(_parse_cell(row[0].strip(), number, "class"))
        if label not in (1, 2, 3):
            raise ParseError(f"row {number}, column 'class': expected 1-3, got {label}")
        labels.append(label - 1)
        features.append([
            _parse_cell(cell.strip(), number, f"attr{k + 1}")
            for k, cell in enumerate(row[1:])
        ])

    if len(features) != WINE_EXPECTED_ROWS:
        warnings.warn(
            UnexpectedRowCount(
                f"{path}: expected {WINE_EXPECTED_ROWS} rows, found {len(features)}"
            )
        )
    features = np.array(features, dtype=float)
    alcohol = features[:, 0].copy()
    if (alcohol <= 0).any():
        raise NonPositiveWeight("alcohol column contains non-positive values")
    return Dataset(
        features=features,
        weights=alcohol,
        true_labels=np.array(labels, dtype=np.int64),
        name=str(path),
    )


def normalize_zscore(dataset: Dataset) -> Dataset:
    """Center each feature and scale to unit sample standard deviation.

    Columns with zero variance pass through unchanged; weights and
    labels are untouched.
    """
    if dataset.n_points < 2:
        raise ValidationError("z-scoring needs at least two points")
    features = dataset.features
    mean = features.mean(axis=0)
    std = features.std(axis=0, ddof=1)
    varying = std > 0.0
    scaled = np.where(varying, (features - mean) / np.where(varying, std, 1.0), features)
    return Dataset(
        features=scaled,
        weights=dataset.weights.copy(),
        true_labels=None if dataset.true_labels is None else dataset.true_labels.copy(),
        name=dataset.name,
    )


def equal_capacities(dataset: Dataset, g: int) -> np.ndarray:
    """Split the total point weight evenly over ``g`` clusters."""
    if g < 1:
        raise ValidationError(f"need g >= 1, got {g}")
    return np.full(g, dataset.weights.sum() / g)
