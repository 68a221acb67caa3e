"""Nearest-centroid classifier over normalized-LZC feature vectors.

The minimal supervised readout: one centroid per class, squared Euclidean
distance, ties broken by lowest class index.  All three learning rules are
scored through this same readout so their accuracies are comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import format_float
from .errors import DataError, DimensionMismatchError, EmptyTestSetError, MissingClassError

__all__ = [
    "CentroidClassifier",
    "fit",
    "predict",
    "predict_batch",
    "accuracy",
    "format_percent",
    "write_classifier",
    "read_classifier",
]


@dataclass(frozen=True)
class CentroidClassifier:
    class_count: int
    centroids: np.ndarray  # (class_count, feature_dim)

    def __post_init__(self) -> None:
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != self.class_count:
            raise ValueError(f"centroids must be ({self.class_count}, d), got {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("centroids must be finite")
        object.__setattr__(self, "centroids", c)

    @property
    def feature_dim(self) -> int:
        return self.centroids.shape[1]


def fit(features: Sequence[tuple[np.ndarray, int]] | None = None,
        X: np.ndarray | None = None, y: np.ndarray | None = None) -> CentroidClassifier:
    """Fit per-class mean centroids from (vector, label) pairs or (X, y) arrays."""
    if features is not None:
        X = np.array([np.asarray(v, dtype=np.float64) for v, _ in features])
        y = np.array([label for _, label in features], dtype=np.int64)
    if X is None or y is None or len(X) == 0:
        raise MissingClassError("no training examples")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise DimensionMismatchError("feature vectors must share one length")
    class_count = int(y.max()) + 1
    centroids = np.empty((class_count, X.shape[1]))
    for c in range(class_count):
        mask = y == c
        if not mask.any():
            raise MissingClassError(f"class {c} has no training examples")
        centroids[c] = X[mask].mean(axis=0)
    return CentroidClassifier(class_count=class_count, centroids=centroids)


def predict(clf: CentroidClassifier, feature: np.ndarray) -> int:
    """Argmin squared distance to the centroids; lowest index wins ties."""
    f = np.asarray(feature, dtype=np.float64)
    if f.shape != (clf.feature_dim,):
        raise DimensionMismatchError(f"feature must have length {clf.feature_dim}")
    d = np.sum(np.square(clf.centroids - f[None, :]), axis=1)
    return int(np.argmin(d))  # argmin returns the first (lowest) index on ties


def predict_batch(clf: CentroidClassifier, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != clf.feature_dim:
        raise DimensionMismatchError(f"features must be (m, {clf.feature_dim})")
    d = np.sum(np.square(X[:, None, :] - clf.centroids[None, :, :]), axis=2)
    return np.argmin(d, axis=1)


def accuracy(clf: CentroidClassifier, test: Sequence[tuple[np.ndarray, int]] | None = None,
             X: np.ndarray | None = None, y: np.ndarray | None = None) -> float:
    """Fraction of correct predictions on a non-empty test set."""
    if test is not None:
        if len(test) == 0:
            raise EmptyTestSetError("test set is empty")
        X = np.array([np.asarray(v, dtype=np.float64) for v, _ in test])
        y = np.array([label for _, label in test], dtype=np.int64)
    if X is None or y is None or len(X) == 0:
        raise EmptyTestSetError("test set is empty")
    pred = predict_batch(clf, X)
    return float(np.mean(pred == np.asarray(y)))


def format_percent(fraction: float) -> str:
    """Accuracy rendered as a two-decimal percentage, e.g. '86.50%'."""
    return f"{fraction * 100.0:.2f}%"


_HEADER_PREFIX = "CENTROIDS v1 "


def write_classifier(path: str | Path, clf: CentroidClassifier) -> None:
    """Plain-text centroid file: header, then one row of floats per class."""
    lines = [f"CENTROIDS v1 classes={clf.class_count} dim={clf.feature_dim}"]
    for row in clf.centroids:
        lines.append(" ".join(format_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_classifier(path: str | Path) -> CentroidClassifier:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise DataError(f"{path}: missing CENTROIDS v1 header")
    try:
        fields = dict(
            part.split("=", 1) for part in lines[0][len(_HEADER_PREFIX):].split(" ")
        )
        class_count = int(fields["classes"])
        dim = int(fields["dim"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad header: {exc}") from exc
    if len(lines) != 1 + class_count:
        raise DataError(f"{path}: expected {class_count} centroid rows")
    try:
        centroids = np.array(
            [[float(v) for v in line.split(" ")] for line in lines[1:]]
        )
    except ValueError as exc:
        raise DataError(f"{path}: bad centroid value: {exc}") from exc
    if centroids.shape != (class_count, dim):
        raise DataError(f"{path}: centroid rows do not match dim={dim}")
    return CentroidClassifier(class_count=class_count, centroids=centroids)
