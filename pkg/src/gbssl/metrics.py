"""Accuracy bookkeeping for transductive predictions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix with predicted classes on rows, true on columns."""

    counts: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ConfigError(f"confusion matrix must be square, got {counts.shape}")
        if np.any(counts < 0):
            raise ConfigError("confusion matrix entries must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(
    predicted: np.ndarray, true: np.ndarray, class_count: int
) -> ConfusionMatrix:
    """Tally predicted against true labels for one evaluation pool."""
    predicted = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    if predicted.shape != true.shape or predicted.ndim != 1:
        raise ConfigError(
            f"predicted and true labels must be 1-d and equal length, "
            f"got {predicted.shape} and {true.shape}"
        )
    if class_count < 2:
        raise ConfigError(f"need at least 2 classes, got {class_count}")
    for name, arr in (("predicted", predicted), ("true", true)):
        if arr.size and (arr.min() < 0 or arr.max() >= class_count):
            raise ConfigError(f"{name} labels fall outside 0..{class_count - 1}")
    counts = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(counts, (predicted, true), 1)
    return ConfusionMatrix(counts)


def overall_accuracy(matrix: ConfusionMatrix) -> float:
    """Trace over total; undefined (and an error) for an empty pool."""
    if matrix.total == 0:
        raise ConfigError("accuracy of an empty evaluation pool is undefined")
    return float(np.trace(matrix.counts) / matrix.total)
