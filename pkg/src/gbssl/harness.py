"""Benchmark harness: seeded experiment runs, sweeps, and CSV reports.

A run draws a labeled split, optionally balances it, propagates, and
scores the result. Sweeps repeat that over a schedule of labeled-count
vectors, neighborhood sizes, or stopping thresholds, aggregating paired
runs (run r always uses seed ``base_seed + r``) into one report row per
configuration and method arm.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .datasets import (
    Dataset,
    LabeledSplit,
    builtin_iris_path,
    load_csv_dataset,
    load_idx_mnist,
    make_two_moons,
    sample_labeled_split,
    select_classes,
    subsample_per_class,
)
from .errors import ConfigError, DataError, GbsslError, NumericalError
from .graph import Graph, LaplacianBundle, build_knn_graph, laplacians
from .inno import InnoEvent, LabelState, imbalance_variance, inno_balance
from .metrics import confusion, overall_accuracy
from .propagation import (
    LgcSolver,
    build_label_matrix,
    cmn_adjust,
    gfhf_propagate,
    labeled_class_frequencies,
    predict,
)

DATASET_NAMES = ("iris", "ionosphere", "mnist5", "mnist10", "two-moons")
METHOD_NAMES = ("gfhf", "lgc", "gfhf+cmn")

# (method, use_inno) arms every sweep reports, in emission order.
STANDARD_ARMS: tuple[tuple[str, bool], ...] = (
    ("gfhf", False),
    ("lgc", False),
    ("gfhf", True),
    ("lgc", True),
    ("gfhf+cmn", False),
)

# per-dataset (k, sigma) defaults
DATASET_DEFAULTS: dict[str, tuple[int, float]] = {
    "iris": (5, 0.26),
    "ionosphere": (10, 1.0),
    "mnist5": (10, 380.0),
    "mnist10": (10, 380.0),
    "two-moons": (60, 1.0),
}

IRIS_CLASS_MAP = {
    "setosa": 0,
    "versicolor": 1,
    "virginica": 2,
    "Iris-setosa": 0,
    "Iris-versicolor": 1,
    "Iris-virginica": 2,
}
IONOSPHERE_CLASS_MAP = {"g": 0, "b": 1}

MNIST_FILES = (
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
)
MNIST_PER_CLASS = 200

GFHF_RESIDUAL_FACTOR = 1e-8
LGC_RESIDUAL_BOUND = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run or sweep needs, with per-dataset defaults left None."""

    dataset: str
    data_path: str | None = None
    method: str | None = None  # None means the five standard arms
    use_inno: bool = False
    k: int | None = None
    sigma: float | None = None
    alpha: float = 0.99
    stop_s: float = 0.0
    labeled_counts: tuple[int, ...] | None = None
    runs: int = 50
    base_seed: int = 0
    var_divisor: str = "c-1"
    moons_n_per_class: int = 100
    moons_noise: float = 0.12

    def __post_init__(self) -> None:
        if self.dataset not in DATASET_NAMES:
            raise ConfigError(
                f"unknown dataset {self.dataset!r}, expected one of {DATASET_NAMES}"
            )
        if self.method is not None and self.method not in METHOD_NAMES:
            raise ConfigError(
                f"unknown method {self.method!r}, expected one of {METHOD_NAMES}"
            )
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.stop_s < 0:
            raise ConfigError(f"stop-s must be >= 0, got {self.stop_s}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.var_divisor not in ("c-1", "c"):
            raise ConfigError(f"var divisor must be 'c-1' or 'c', got {self.var_divisor!r}")

    def resolved_k_sigma(self) -> tuple[int, float]:
        k_default, sigma_default = DATASET_DEFAULTS[self.dataset]
        return (
            self.k if self.k is not None else k_default,
            self.sigma if self.sigma is not None else sigma_default,
        )


def default_counts(dataset: str, class_count: int) -> tuple[int, ...]:
    """Fixed labeled-count vector used when a sweep does not vary it."""
    if dataset == "iris":
        return (10, 1, 20)
    if dataset == "ionosphere":
        return (23, 2)
    if dataset == "two-moons":
        return (1, 10)
    counts = [10] * class_count
    counts[0] = 1
    counts[-1] = 19
    return tuple(counts)


def imbalance_schedule(dataset: str, class_count: int) -> list[tuple[int, ...]]:
    """Labeled-count vectors swept by the imbalance benchmark."""
    if dataset == "iris":
        return [(10, 11 - i, 9 + i) for i in range(1, 11)]
    if dataset == "ionosphere":
        return [(11 + i, 12 - i) for i in range(1, 11)]
    if dataset == "two-moons":
        return [(11 - i, 9 + i) for i in range(1, 11)]
    points = []
    for i in range(10):
        counts = [10] * class_count
        counts[0] = 10 - i
        counts[-1] = 10 + i
        points.append(tuple(counts))
    return points


def _find_idx_file(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / (stem + ".gz")):
        if candidate.is_file():
            return candidate
    raise DataError(
        f"expected IDX file {stem}[.gz] under {directory}; "
        f"place the four standard digit files there"
    )


def load_config_dataset(config: ExperimentConfig) -> Dataset:
    """Materialize the dataset a config points at."""
    name = config.dataset
    if name == "iris":
        path = Path(config.data_path) if config.data_path else builtin_iris_path()
        return load_csv_dataset(path, -1, IRIS_CLASS_MAP, name="iris")
    if name == "ionosphere":
        if config.data_path is None:
            raise ConfigError(
                "ionosphere has no bundled copy; pass --data-path "
                "pointing at the 351-row CSV with a trailing g/b column"
            )
        return load_csv_dataset(
            config.data_path, -1, IONOSPHERE_CLASS_MAP, name="ionosphere"
        )
    if name in ("mnist5", "mnist10"):
        if config.data_path is None:
            raise ConfigError(
                "digit data is not bundled; pass --data-path pointing at a "
                "directory with the four standard IDX files"
            )
        directory = Path(config.data_path)
        if not directory.is_dir():
            raise DataError(f"--data-path must be a directory, got {directory}")
        parts = []
        for image_stem, label_stem in MNIST_FILES:
            parts.append(
                load_idx_mnist(
                    _find_idx_file(directory, image_stem),
                    _find_idx_file(directory, label_stem),
                )
            )
        features = np.vstack([p.features for p in parts])
        labels = np.concatenate([p.labels for p in parts])
        full = Dataset(features, labels, 10, "mnist")
        pool = subsample_per_class(full, MNIST_PER_CLASS, config.base_seed)
        if name == "mnist5":
            return select_classes(pool, [5, 6, 7, 8, 9])
        return pool
    return make_two_moons(
        config.moons_n_per_class, config.moons_noise, config.base_seed
    )


@dataclass
class PreparedExperiment:
    """Dataset, graph, and solver state shared by all runs of a sweep point."""

    config: ExperimentConfig
    dataset: Dataset
    graph: Graph
    bundle: LaplacianBundle
    _lgc_solver: LgcSolver | None = field(default=None, repr=False)

    @property
    def max_degree(self) -> float:
        return float(self.bundle.degrees.max())

    def lgc_solver(self) -> LgcSolver:
        if self._lgc_solver is None:
            self._lgc_solver = LgcSolver(self.graph, self.config.alpha)
        return self._lgc_solver


def prepare(config: ExperimentConfig) -> PreparedExperiment:
    dataset = load_config_dataset(config)
    k, sigma = config.resolved_k_sigma()
    graph = build_knn_graph(dataset.features, k, sigma)
    return PreparedExperiment(config, dataset, graph, laplacians(graph))


@contextmanager
def _stage(name: str, run_index: int) -> Iterator[None]:
    try:
        yield
    except GbsslError as exc:
        raise type(exc)(f"[run {run_index}, stage {name}] {exc}") from exc


@dataclass(frozen=True)
class RunOutcome:
    """Everything measured in one seeded run of one method arm."""

    run_index: int
    method: str
    use_inno: bool
    accuracy: float
    accuracy_never_labeled: float
    inno_additions: int
    final_true_counts: tuple[int, ...]
    runtime_ms: float
    inno_ms: float
    log: list[InnoEvent] = field(repr=False)
    split: LabeledSplit = field(repr=False)
    state: LabelState = field(repr=False)
    predictions: np.ndarray = field(repr=False)


def run_single(
    config: ExperimentConfig,
    run_index: int,
    prepared: PreparedExperiment | None = None,
    counts: Sequence[int] | None = None,
    method: str | None = None,
    use_inno: bool | None = None,
) -> RunOutcome:
    """One seeded split -> optional balancing -> propagation -> accuracy.

    The split seed is ``base_seed + run_index`` so arms sharing a run index
    see the same labeled set. Stage failures carry the run index and stage
    name in their message.
    """
    if prepared is None:
        prepared = prepare(config)
    dataset, graph = prepared.dataset, prepared.graph
    c = dataset.class_count
    if counts is None:
        counts = config.labeled_counts or default_counts(config.dataset, c)
    method = method if method is not None else (config.method or "gfhf")
    if method not in METHOD_NAMES:
        raise ConfigError(f"unknown method {method!r}")
    if use_inno is None:
        use_inno = config.use_inno

    started = time.perf_counter()
    with _stage("split", run_index):
        split = sample_labeled_split(dataset, counts, config.base_seed + run_index)
        initial = LabelState.from_split(dataset.labels, split, c)

    inno_ms = 0.0
    log: list[InnoEvent] = []
    state = initial
    if use_inno:
        with _stage("balance", run_index):
            inno_started = time.perf_counter()
            result = inno_balance(graph, initial, config.stop_s, config.var_divisor)
            inno_ms = (time.perf_counter() - inno_started) * 1e3
            state = result.state
            log = result.log

    with _stage("propagate", run_index):
        labels_matrix = build_label_matrix(state.assignment, c)
        labeled_mask = state.labeled_mask()
        if method == "lgc":
            scores = prepared.lgc_solver().propagate(labels_matrix, labeled_mask)
            if scores.residual is not None and scores.residual > LGC_RESIDUAL_BOUND:
                raise NumericalError(
                    f"LGC residual {scores.residual:.3e} above {LGC_RESIDUAL_BOUND:.0e}"
                )
        else:
            scores = gfhf_propagate(prepared.graph, labels_matrix, labeled_mask)
            bound = GFHF_RESIDUAL_FACTOR * prepared.max_degree
            if scores.residual is not None and scores.residual > bound:
                raise NumericalError(
                    f"harmonic residual {scores.residual:.3e} above {bound:.3e}"
                )
        if method == "gfhf+cmn":
            prior = labeled_class_frequencies(initial.assignment, c)
            try:
                scores = cmn_adjust(scores, ~labeled_mask, prior)
            except NumericalError:
                pass  # fall back to unadjusted scores on zero column mass

    with _stage("evaluate", run_index):
        predictions = predict(scores)
        # labeled samples keep their assigned class, including inno additions
        predictions[labeled_mask] = state.assignment[labeled_mask]
        eval_mask = np.ones(dataset.n, dtype=bool)
        eval_mask[split.labeled_indices] = False
        accuracy = overall_accuracy(
            confusion(predictions[eval_mask], dataset.labels[eval_mask], c)
        )
        never_mask = ~labeled_mask
        if never_mask.any():
            accuracy_never = overall_accuracy(
                confusion(predictions[never_mask], dataset.labels[never_mask], c)
            )
        else:
            accuracy_never = float("nan")

    runtime_ms = (time.perf_counter() - started) * 1e3
    return RunOutcome(
        run_index=run_index,
        method=method,
        use_inno=use_inno,
        accuracy=accuracy,
        accuracy_never_labeled=accuracy_never,
        inno_additions=sum(1 for e in log if e.action == "added"),
        final_true_counts=tuple(int(v) for v in state.true_counts),
        runtime_ms=runtime_ms,
        inno_ms=inno_ms,
        log=log,
        split=split,
        state=state,
        predictions=predictions,
    )


@dataclass(frozen=True)
class ResultRow:
    """One aggregated report line: a sweep point crossed with a method arm."""

    sweep_value: float
    counts: tuple[int, ...]
    var_r_cminus1: float
    var_r_c: float
    ratio_max_min: float
    method: str
    inno: bool
    mean_accuracy: float
    std_accuracy: float
    mean_accuracy_never_labeled: float
    mean_inno_additions: float
    mean_runtime_ms: float
    mean_final_true_counts: tuple[float, ...] = field(repr=False, default=())

    @property
    def arm(self) -> str:
        return ("inno+" if self.inno else "") + self.method


CSV_COLUMNS = (
    "sweep_value",
    "counts",
    "var_r_cminus1",
    "var_r_c",
    "ratio_max_min",
    "method",
    "inno",
    "mean_accuracy",
    "std_accuracy",
    "mean_accuracy_never_labeled",
    "mean_inno_additions",
    "mean_runtime_ms",
)


def _arms(config: ExperimentConfig) -> tuple[tuple[str, bool], ...]:
    if config.method is None:
        return STANDARD_ARMS
    return ((config.method, config.use_inno),)


def aggregate_runs(
    config: ExperimentConfig,
    prepared: PreparedExperiment,
    counts: Sequence[int],
    method: str,
    use_inno: bool,
    sweep_value: float,
) -> ResultRow:
    """Aggregate ``config.runs`` paired runs of one arm into a report row."""
    outcomes = [
        run_single(config, r, prepared, counts, method, use_inno)
        for r in range(config.runs)
    ]
    accuracies = np.array([o.accuracy for o in outcomes])
    never = np.array([o.accuracy_never_labeled for o in outcomes])
    counts = tuple(int(v) for v in counts)
    finals = np.array([o.final_true_counts for o in outcomes], dtype=np.float64)
    return ResultRow(
        sweep_value=float(sweep_value),
        counts=counts,
        var_r_cminus1=imbalance_variance(counts, "c-1"),
        var_r_c=imbalance_variance(counts, "c"),
        ratio_max_min=max(counts) / min(counts),
        method=method,
        inno=use_inno,
        mean_accuracy=float(accuracies.mean()),
        std_accuracy=float(accuracies.std()),
        mean_accuracy_never_labeled=float(np.nanmean(never)) if never.size else float("nan"),
        mean_inno_additions=float(np.mean([o.inno_additions for o in outcomes])),
        mean_runtime_ms=float(np.mean([o.runtime_ms for o in outcomes])),
        mean_final_true_counts=tuple(finals.mean(axis=0)),
    )


def sweep_imbalance(config: ExperimentConfig) -> list[ResultRow]:
    """Accuracy as the labeled set grows more skewed at fixed total size.

    Rows come out ordered by increasing initial count variance, one row per
    schedule point and method arm.
    """
    prepared = prepare(config)
    points = imbalance_schedule(config.dataset, prepared.dataset.class_count)
    points = sorted(points, key=lambda cnt: imbalance_variance(cnt, "c-1"))
    rows = []
    for counts in points:
        value = imbalance_variance(counts, "c-1")
        for method, use_inno in _arms(config):
            rows.append(
                aggregate_runs(config, prepared, counts, method, use_inno, value)
            )
    return rows


def sweep_k(config: ExperimentConfig, k_values: Sequence[int]) -> list[ResultRow]:
    """Accuracy as the neighborhood size varies at fixed labeled counts."""
    if not k_values:
        raise ConfigError("sweep-k needs at least one k value")
    rows = []
    for k in k_values:
        point_config = replace(config, k=int(k))
        prepared = prepare(point_config)
        counts = config.labeled_counts or default_counts(
            config.dataset, prepared.dataset.class_count
        )
        for method, use_inno in _arms(config):
            rows.append(
                aggregate_runs(
                    point_config, prepared, counts, method, use_inno, float(k)
                )
            )
    return rows


def sweep_s(config: ExperimentConfig, s_values: Sequence[float]) -> list[ResultRow]:
    """Accuracy as the stopping threshold varies; given order is preserved."""
    if len(s_values) == 0:
        raise ConfigError("sweep-s needs at least one s value")
    prepared = prepare(config)
    counts = config.labeled_counts or default_counts(
        config.dataset, prepared.dataset.class_count
    )
    rows = []
    for s in s_values:
        point_config = replace(config, stop_s=float(s))
        for method, use_inno in _arms(config):
            rows.append(
                aggregate_runs(
                    point_config, prepared, counts, method, use_inno, float(s)
                )
            )
    return rows


@dataclass(frozen=True)
class DemoResult:
    """Single-split demo on the synthetic arcs, one outcome per arm."""

    rows: list[ResultRow]
    dataset: Dataset
    outcomes: list[RunOutcome] = field(repr=False)


def run_demo(config: ExperimentConfig) -> DemoResult:
    """Run every arm once on one seeded two-arc instance and split."""
    if config.dataset != "two-moons":
        raise ConfigError("the demo runs on the two-moons dataset")
    prepared = prepare(config)
    counts = config.labeled_counts or default_counts(
        config.dataset, prepared.dataset.class_count
    )
    demo_config = replace(config, runs=1)
    value = imbalance_variance(counts, "c-1")
    rows = []
    outcomes = []
    for method, use_inno in _arms(config):
        rows.append(
            aggregate_runs(demo_config, prepared, counts, method, use_inno, value)
        )
        outcomes.append(
            run_single(demo_config, 0, prepared, counts, method, use_inno)
        )
    return DemoResult(rows=rows, dataset=prepared.dataset, outcomes=outcomes)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ":".join(str(v) for v in value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_csv(rows: Sequence[ResultRow]) -> str:
    """Render report rows as delimited text with 6 significant digits."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(_format_value(getattr(row, column)) for column in CSV_COLUMNS)
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    """Write the report; emitting the same rows twice gives identical bytes."""
    Path(path).write_text(format_csv(rows))
