"""Dataset loading, synthetic data generation, and labeled/unlabeled splits.

Feature values are always used raw. No scaling or normalization is applied
by any loader, so kernel bandwidths refer to the original feature units.
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
MNIST_SIDE = 28


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus ground-truth labels in ``0..class_count-1``.

    Instances are treated as immutable: the arrays are marked read-only at
    construction time and later stages never copy them defensively.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DataError(f"features must be 2-d, got shape {features.shape}")
        if labels.ndim != 1:
            raise DataError(f"labels must be 1-d, got shape {labels.shape}")
        if features.shape[0] != labels.shape[0]:
            raise DataError(
                f"row count mismatch: {features.shape[0]} feature rows "
                f"vs {labels.shape[0]} labels"
            )
        if features.shape[0] == 0 or features.shape[1] == 0:
            raise DataError("dataset must contain at least one row and one feature")
        if not np.all(np.isfinite(features)):
            raise DataError("features contain non-finite values")
        if self.class_count < 2:
            raise DataError(f"need at least 2 classes, got {self.class_count}")
        if labels.min(initial=0) < 0 or labels.max(initial=0) >= self.class_count:
            raise DataError(
                f"labels must lie in 0..{self.class_count - 1}, "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        sizes = np.bincount(labels, minlength=self.class_count)
        if np.any(sizes == 0):
            empty = np.flatnonzero(sizes == 0).tolist()
            raise DataError(f"classes {empty} have no samples")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


@dataclass(frozen=True)
class LabeledSplit:
    """Disjoint labeled/unlabeled index sets covering a dataset."""

    labeled_indices: np.ndarray
    unlabeled_indices: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        labeled = np.asarray(self.labeled_indices, dtype=np.int64)
        unlabeled = np.asarray(self.unlabeled_indices, dtype=np.int64)
        n = labeled.size + unlabeled.size
        union = np.concatenate([labeled, unlabeled])
        if labeled.size == 0:
            raise ConfigError("split must label at least one sample")
        if np.unique(union).size != n or union.min() < 0 or union.max() != n - 1:
            raise ConfigError("labeled and unlabeled sets must partition 0..n-1")
        labeled.flags.writeable = False
        unlabeled.flags.writeable = False
        object.__setattr__(self, "labeled_indices", labeled)
        object.__setattr__(self, "unlabeled_indices", unlabeled)

    @property
    def n(self) -> int:
        return self.labeled_indices.size + self.unlabeled_indices.size


def builtin_iris_path() -> Path:
    """Path of the iris measurements CSV bundled with the package."""
    return Path(str(resources.files("gbssl").joinpath("data/iris.csv")))


def load_csv_dataset(
    path: str | Path,
    label_column: int | str,
    class_map: Mapping[str, int],
    name: str | None = None,
) -> Dataset:
    """Load a delimited text file of numeric features plus a class column.

    Parameters
    ----------
    path : file to read. A header row is detected automatically: the first
        row is treated as a header when any of its feature cells fails to
        parse as a float.
    label_column : position of the class column, by integer index (negative
        indices count from the end) or by header name.
    class_map : mapping from class strings to contiguous integers 0..c-1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path}: file contains no data rows")

    arity = len(rows[0])
    if arity < 2:
        raise DataError(f"{path}: rows need at least one feature and a label")

    if isinstance(label_column, str):
        if label_column not in rows[0]:
            raise DataError(
                f"{path}: label column {label_column!r} not found in header row"
            )
        label_idx = rows[0].index(label_column)
        data_rows = rows[1:]
        first_data = 2
    else:
        label_idx = label_column if label_column >= 0 else arity + label_column
        if not 0 <= label_idx < arity:
            raise ConfigError(
                f"label column {label_column} out of range for {arity} columns"
            )
        header = any(
            not _parses_as_float(cell)
            for pos, cell in enumerate(rows[0])
            if pos != label_idx
        )
        data_rows = rows[1:] if header else rows
        first_data = 2 if header else 1

    if not data_rows:
        raise DataError(f"{path}: no data rows after the header")

    features = np.empty((len(data_rows), arity - 1), dtype=np.float64)
    labels = np.empty(len(data_rows), dtype=np.int64)
    for r, row in enumerate(data_rows):
        line_no = first_data + r
        if len(row) != arity:
            raise DataError(
                f"{path}: line {line_no} has {len(row)} fields, expected {arity}"
            )
        tag = row[label_idx].strip()
        if tag not in class_map:
            raise DataError(f"{path}: line {line_no} has unmapped class {tag!r}")
        labels[r] = class_map[tag]
        col = 0
        for pos, cell in enumerate(row):
            if pos == label_idx:
                continue
            try:
                features[r, col] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: line {line_no}, column {pos + 1}: "
                    f"non-numeric feature value {cell!r}"
                ) from None
            col += 1

    class_count = max(class_map.values()) + 1
    return Dataset(features, labels, class_count, name or path.stem)


def _parses_as_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_idx_payload(path: str | Path) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"IDX file not found: {path}")
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        try:
            raw = gzip.decompress(raw)
        except OSError as exc:
            raise DataError(f"{path}: bad gzip stream: {exc}") from exc
    return raw


def load_idx_mnist(images_path: str | Path, labels_path: str | Path) -> Dataset:
    """Load a big-endian IDX image/label file pair of 28x28 grayscale digits.

    Pixels are kept as raw 0..255 intensities cast to float64. Gzipped
    files are decompressed transparently.
    """
    img_raw = _read_idx_payload(images_path)
    if len(img_raw) < 16:
        raise DataError(f"{images_path}: truncated IDX image header")
    magic, count, rows, cols = struct.unpack(">IIII", img_raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise DataError(
            f"{images_path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )
    if rows != MNIST_SIDE or cols != MNIST_SIDE:
        raise DataError(
            f"{images_path}: expected {MNIST_SIDE}x{MNIST_SIDE} images, "
            f"got {rows}x{cols}"
        )
    expected = count * rows * cols
    if len(img_raw) - 16 != expected:
        raise DataError(
            f"{images_path}: payload holds {len(img_raw) - 16} bytes, "
            f"header promises {expected}"
        )
    features = (
        np.frombuffer(img_raw, dtype=np.uint8, offset=16)
        .reshape(count, rows * cols)
        .astype(np.float64)
    )

    lab_raw = _read_idx_payload(labels_path)
    if len(lab_raw) < 8:
        raise DataError(f"{labels_path}: truncated IDX label header")
    magic, lab_count = struct.unpack(">II", lab_raw[:8])
    if magic != IDX_LABEL_MAGIC:
        raise DataError(
            f"{labels_path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
        )
    if len(lab_raw) - 8 != lab_count:
        raise DataError(
            f"{labels_path}: payload holds {len(lab_raw) - 8} labels, "
            f"header promises {lab_count}"
        )
    if lab_count != count:
        raise DataError(
            f"image/label count mismatch: {count} images vs {lab_count} labels"
        )
    labels = np.frombuffer(lab_raw, dtype=np.uint8, offset=8).astype(np.int64)
    if labels.max(initial=0) > 9:
        raise DataError(f"{labels_path}: digit labels above 9 present")

    return Dataset(features, labels, int(labels.max()) + 1, "mnist")


def subsample_per_class(dataset: Dataset, per_class: int, seed: int) -> Dataset:
    """Draw ``per_class`` samples from every class, preserving row order."""
    if per_class < 1:
        raise ConfigError(f"per_class must be >= 1, got {per_class}")
    sizes = dataset.class_sizes()
    if per_class > sizes.min():
        raise ConfigError(
            f"per_class={per_class} exceeds smallest class size {sizes.min()}"
        )
    rng = np.random.default_rng(seed)
    keep = []
    for j in range(dataset.class_count):
        members = np.flatnonzero(dataset.labels == j)
        keep.append(rng.choice(members, size=per_class, replace=False))
    order = np.sort(np.concatenate(keep))
    return Dataset(
        dataset.features[order].copy(),
        dataset.labels[order].copy(),
        dataset.class_count,
        f"{dataset.name}-per{per_class}",
    )


def select_classes(dataset: Dataset, classes: Sequence[int]) -> Dataset:
    """Restrict to the given classes, relabeled to 0..len(classes)-1 in order."""
    classes = list(classes)
    if len(classes) < 2:
        raise ConfigError("need at least two classes")
    if len(set(classes)) != len(classes):
        raise ConfigError(f"duplicate class in selection: {classes}")
    for j in classes:
        if not 0 <= j < dataset.class_count:
            raise ConfigError(f"class {j} out of range 0..{dataset.class_count - 1}")
    remap = {j: pos for pos, j in enumerate(classes)}
    mask = np.isin(dataset.labels, classes)
    order = np.flatnonzero(mask)
    labels = np.array([remap[j] for j in dataset.labels[order]], dtype=np.int64)
    return Dataset(
        dataset.features[order].copy(),
        labels,
        len(classes),
        f"{dataset.name}-c{len(classes)}",
    )


def make_two_moons(n_per_class: int, noise: float, seed: int) -> Dataset:
    """Two interleaved half-circle arcs with Gaussian jitter.

    Class 0 is the upper unit arc (cos t, sin t) for t in [0, pi]. Class 1
    is the mirrored lower arc offset by (1.0, -0.5). Rows hold all class 0
    samples first.
    """
    if n_per_class < 2:
        raise ConfigError(f"n_per_class must be >= 2, got {n_per_class}")
    if noise < 0:
        raise ConfigError(f"noise must be >= 0, got {noise}")
    t = np.linspace(0.0, np.pi, n_per_class)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    lower = np.column_stack([1.0 - np.cos(t), -np.sin(t) - 0.5])
    features = np.vstack([upper, lower])
    rng = np.random.default_rng(seed)
    features = features + rng.normal(0.0, noise, size=features.shape)
    labels = np.repeat(np.array([0, 1], dtype=np.int64), n_per_class)
    return Dataset(features, labels, 2, "two-moons")


def sample_labeled_split(
    dataset: Dataset, counts: Sequence[int], seed: int
) -> LabeledSplit:
    """Draw the requested number of labeled samples from each class.

    Sampling is without replacement, independently per class, driven by a
    fresh generator seeded with ``seed``. Index arrays come back sorted.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (dataset.class_count,):
        raise ConfigError(
            f"counts must have one entry per class "
            f"({dataset.class_count}), got {counts.tolist()}"
        )
    if np.any(counts < 1):
        raise ConfigError(f"every class needs at least one label, got {counts.tolist()}")
    sizes = dataset.class_sizes()
    if np.any(counts > sizes):
        bad = int(np.flatnonzero(counts > sizes)[0])
        raise ConfigError(
            f"class {bad} has {sizes[bad]} samples but {counts[bad]} labels requested"
        )
    rng = np.random.default_rng(seed)
    chosen = []
    for j in range(dataset.class_count):
        members = np.flatnonzero(dataset.labels == j)
        chosen.append(rng.choice(members, size=counts[j], replace=False))
    labeled = np.sort(np.concatenate(chosen))
    mask = np.zeros(dataset.n, dtype=bool)
    mask[labeled] = True
    return LabeledSplit(labeled, np.flatnonzero(~mask), seed)
