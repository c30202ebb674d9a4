"""Iterative nearest-neighborhood oversampling of an imbalanced labeled set.

Starting from a labeled/unlabeled partition on an affinity graph, the
balancer repeatedly picks the class with the fewest effective labels and
promotes the unlabeled sample most strongly tied to that class, skipping
any candidate that also touches a differently labeled sample. A class with
no admissible candidate left saturates: its effective count is pinned to
the current maximum so the loop moves on instead of spinning on it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .datasets import LabeledSplit
from .errors import ConfigError
from .graph import Graph

UNLABELED = -1

PROV_NONE = 0
PROV_SEED = 1
PROV_INNO = 2


@dataclass
class LabelState:
    """Mutable labeling of a sample set during balancing.

    ``assignment`` holds a class index per sample, with -1 for unlabeled.
    ``true_counts`` counts actual labels per class while
    ``effective_counts`` additionally pins saturated classes to the maximum,
    which is what the stopping variance is computed over. ``provenance``
    records whether a label came with the split or was added here.
    """

    assignment: np.ndarray
    true_counts: np.ndarray
    effective_counts: np.ndarray
    saturated: np.ndarray
    provenance: np.ndarray

    @classmethod
    def from_split(
        cls, labels: np.ndarray, split: LabeledSplit, class_count: int
    ) -> "LabelState":
        labels = np.asarray(labels, dtype=np.int64)
        assignment = np.full(labels.shape[0], UNLABELED, dtype=np.int64)
        assignment[split.labeled_indices] = labels[split.labeled_indices]
        provenance = np.full(labels.shape[0], PROV_NONE, dtype=np.uint8)
        provenance[split.labeled_indices] = PROV_SEED
        counts = np.bincount(
            assignment[split.labeled_indices], minlength=class_count
        ).astype(np.int64)
        if np.any(counts == 0):
            missing = np.flatnonzero(counts == 0).tolist()
            raise ConfigError(f"classes {missing} have no labeled seed sample")
        return cls(
            assignment=assignment,
            true_counts=counts,
            effective_counts=counts.copy(),
            saturated=np.zeros(class_count, dtype=bool),
            provenance=provenance,
        )

    @property
    def class_count(self) -> int:
        return self.true_counts.shape[0]

    def labeled_mask(self) -> np.ndarray:
        return self.assignment != UNLABELED

    def copy(self) -> "LabelState":
        return LabelState(
            assignment=self.assignment.copy(),
            true_counts=self.true_counts.copy(),
            effective_counts=self.effective_counts.copy(),
            saturated=self.saturated.copy(),
            provenance=self.provenance.copy(),
        )


class Candidate(NamedTuple):
    index: int
    weight: float


@dataclass(frozen=True)
class InnoEvent:
    """One balancing step: either a promoted sample or a saturated class."""

    iteration: int
    action: str  # "added" or "saturated"
    class_index: int
    sample_index: int | None = None
    weight: float | None = None


@dataclass(frozen=True)
class InnoResult:
    state: LabelState
    log: list[InnoEvent] = field(repr=False)
    iterations: int

    @property
    def additions(self) -> int:
        return sum(1 for event in self.log if event.action == "added")


def imbalance_variance(counts: Sequence[int], divisor: str = "c-1") -> float:
    """Spread of per-class label counts around their mean.

    sqrt(sum_j (r_j - rbar)^2 / (c - 1)) by default; pass divisor="c" for
    the population form. The corrected divisor is what reproduces the
    reference values 9.50 for counts (10, 1, 20) and 14.85 for (23, 2).
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.shape[0] < 2:
        raise ConfigError(f"need counts for at least 2 classes, got {counts.shape}")
    if divisor not in ("c-1", "c"):
        raise ConfigError(f"divisor must be 'c-1' or 'c', got {divisor!r}")
    c = counts.shape[0]
    denom = c - 1 if divisor == "c-1" else c
    mean = counts.mean()
    return float(np.sqrt(np.sum((counts - mean) ** 2) / denom))


def find_minority_class(state: LabelState) -> int | None:
    """Non-saturated class with the smallest effective count, lowest index first."""
    best = None
    for j in range(state.class_count):
        if state.saturated[j]:
            continue
        if best is None or state.effective_counts[j] < state.effective_counts[best]:
            best = j
    return best


def best_candidate(graph: Graph, state: LabelState, class_j: int) -> Candidate | None:
    """Strongest admissible unlabeled neighbor of class ``class_j`` labels.

    Admissible means unlabeled and not adjacent to any sample labeled with
    a different class. The score of a candidate is its heaviest edge into
    the class-j labeled set; ties prefer the lower sample index.
    """
    if not 0 <= class_j < state.class_count:
        raise ConfigError(f"class {class_j} out of range")
    anchors = np.flatnonzero(state.assignment == class_j)
    if anchors.size == 0:
        raise ConfigError(f"class {class_j} has no labeled samples")
    assignment = state.assignment

    reached = np.concatenate([graph.neighbors(x) for x in anchors])
    reached_w = np.concatenate([graph.neighbor_weights(x) for x in anchors])
    open_mask = assignment[reached] == UNLABELED
    if not open_mask.any():
        return None
    reached = reached[open_mask]
    reached_w = reached_w[open_mask]
    # heaviest anchor edge per candidate; np.unique sorts, keeping ties
    # resolvable toward the lower index by argmax below
    candidates, inverse = np.unique(reached, return_inverse=True)
    weight = np.full(candidates.shape[0], -np.inf)
    np.maximum.at(weight, inverse, reached_w)

    other = (assignment != UNLABELED) & (assignment != class_j)
    # positive weights make W @ other strictly positive exactly on the
    # vertices touching an other-class label
    boundary_mass = graph.weights @ other.astype(np.float64)
    clear = np.flatnonzero(boundary_mass[candidates] == 0.0)
    if clear.size == 0:
        return None
    pick = clear[np.argmax(weight[clear])]
    return Candidate(int(candidates[pick]), float(weight[pick]))


def inno_balance(
    graph: Graph,
    initial: LabelState,
    stop_s: float,
    divisor: str = "c-1",
) -> InnoResult:
    """Grow minority labeled sets until the count variance drops to ``stop_s``.

    The input state is not modified. Every promotion and saturation is
    logged in order, so a run can be audited or replayed afterwards.
    """
    if stop_s < 0:
        raise ConfigError(f"stop threshold must be >= 0, got {stop_s}")
    if graph.n != initial.assignment.shape[0]:
        raise ConfigError(
            f"graph has {graph.n} vertices but state covers "
            f"{initial.assignment.shape[0]} samples"
        )
    state = initial.copy()
    log: list[InnoEvent] = []
    iteration = 0
    while imbalance_variance(state.effective_counts, divisor) > stop_s:
        j = find_minority_class(state)
        if j is None:
            break
        iteration += 1
        found = best_candidate(graph, state, j)
        if found is None:
            state.saturated[j] = True
            state.effective_counts[j] = state.effective_counts.max()
            log.append(InnoEvent(iteration, "saturated", j))
        else:
            state.assignment[found.index] = j
            state.provenance[found.index] = PROV_INNO
            state.true_counts[j] += 1
            state.effective_counts[j] += 1
            log.append(InnoEvent(iteration, "added", j, found.index, found.weight))
    return InnoResult(state=state, log=log, iterations=iteration)


def export_addition_log(log: Sequence[InnoEvent], path: str | Path) -> None:
    """Write the balancing log as CSV, one row per iteration."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["iteration", "action", "class", "sample", "weight"])
        for event in log:
            writer.writerow(
                [
                    event.iteration,
                    event.action,
                    event.class_index,
                    "" if event.sample_index is None else event.sample_index,
                    "" if event.weight is None else f"{event.weight:.17g}",
                ]
            )
