"""Label propagation over affinity graphs: harmonic (GFHF) and LGC solvers.

Both solvers take a one-hot label matrix and return per-class scores for
every sample. Linear systems are solved by direct dense factorization,
which is exact enough that residuals land near machine precision at the
problem sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, NumericalError
from .graph import Graph, laplacians

UNLABELED = -1


@dataclass(frozen=True)
class ScoreMatrix:
    """Per-sample, per-class scores produced by one propagation method.

    ``residual`` is the max-entry defect of the linear system the solver
    actually solved; iterative runs also report their iteration count and
    whether the tolerance was reached.
    """

    values: np.ndarray = field(repr=False)
    method_tag: str
    residual: float | None = None
    iterations: int | None = None
    converged: bool | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def class_count(self) -> int:
        return self.values.shape[1]


def build_label_matrix(assignment: np.ndarray, class_count: int) -> np.ndarray:
    """One-hot rows for labeled samples, all-zero rows for unlabeled ones."""
    assignment = np.asarray(assignment, dtype=np.int64)
    if class_count < 2:
        raise ConfigError(f"need at least 2 classes, got {class_count}")
    if assignment.max(initial=UNLABELED) >= class_count:
        raise ConfigError("assignment contains a class index out of range")
    y = np.zeros((assignment.shape[0], class_count), dtype=np.float64)
    labeled = np.flatnonzero(assignment != UNLABELED)
    y[labeled, assignment[labeled]] = 1.0
    return y


def labeled_class_frequencies(assignment: np.ndarray, class_count: int) -> np.ndarray:
    """Proportion of labeled samples per class; the usual mass prior."""
    assignment = np.asarray(assignment, dtype=np.int64)
    labeled = assignment[assignment != UNLABELED]
    if labeled.size == 0:
        raise ConfigError("no labeled samples to derive a prior from")
    counts = np.bincount(labeled, minlength=class_count).astype(np.float64)
    return counts / counts.sum()


def _check_label_matrix(labels: np.ndarray, labeled_mask: np.ndarray) -> None:
    if labels.ndim != 2 or labels.shape[1] < 2:
        raise ConfigError(f"label matrix must be n x c with c >= 2, got {labels.shape}")
    if labeled_mask.shape != (labels.shape[0],):
        raise ConfigError("labeled mask length must match label matrix rows")
    sums = labels.sum(axis=1)
    onehot = (labels == 0.0) | (labels == 1.0)
    if not np.all(onehot):
        raise ConfigError("label matrix entries must be 0 or 1")
    if np.any(sums[labeled_mask] != 1.0) or np.any(sums[~labeled_mask] != 0.0):
        raise ConfigError("rows summing to 1 must be exactly the labeled samples")


def gfhf_propagate(
    graph: Graph, labels: np.ndarray, labeled_mask: np.ndarray
) -> ScoreMatrix:
    """Harmonic-function propagation with labeled rows clamped.

    Unlabeled scores solve ``(D_UU - W_UU) F_U = W_UL Y_L``. Connected
    components that contain no labeled sample get uniform ``1/c`` rows,
    since the harmonic extension is undetermined there.
    """
    labels = np.asarray(labels, dtype=np.float64)
    labeled_mask = np.asarray(labeled_mask, dtype=bool)
    _check_label_matrix(labels, labeled_mask)
    if graph.n != labels.shape[0]:
        raise ConfigError(f"graph has {graph.n} vertices, labels have {labels.shape[0]} rows")
    if not labeled_mask.any():
        raise ConfigError("at least one sample must be labeled")
    c = labels.shape[1]

    n_comp, comp = connected_components(graph.weights, directed=False)
    comp_hit = np.zeros(n_comp, dtype=bool)
    comp_hit[comp[labeled_mask]] = True
    solvable = ~labeled_mask & comp_hit[comp]
    orphan = ~labeled_mask & ~comp_hit[comp]

    scores = np.array(labels, copy=True)
    scores[orphan] = 1.0 / c

    residual = 0.0
    u_idx = np.flatnonzero(solvable)
    if u_idx.size:
        l_idx = np.flatnonzero(labeled_mask)
        degrees = graph.degrees()
        w_uu = graph.weights[np.ix_(u_idx, u_idx)].toarray()
        system = np.diag(degrees[u_idx]) - w_uu
        rhs = graph.weights[np.ix_(u_idx, l_idx)] @ labels[l_idx]
        try:
            f_u = scipy.linalg.solve(system, rhs, assume_a="pos")
        except np.linalg.LinAlgError as exc:
            bad = sorted(set(comp[u_idx].tolist()))
            raise NumericalError(
                f"harmonic system is singular (components {bad}); "
                f"graph may be degenerate"
            ) from exc
        scores[u_idx] = f_u
        residual = float(np.abs(system @ f_u - rhs).max())

    return ScoreMatrix(values=scores, method_tag="gfhf", residual=residual)


class LgcSolver:
    """Factorized ``(I - alpha * S)`` operator, reusable across label matrices.

    Building the factorization costs one dense Cholesky; afterwards each
    propagation is two triangular solves, which is what makes repeated
    experiment runs over a fixed graph cheap.
    """

    def __init__(self, graph: Graph, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
        self.graph = graph
        self.alpha = alpha
        self._sim = laplacians(graph).normalized_similarity
        system = -alpha * self._sim.toarray()
        np.fill_diagonal(system, system.diagonal() + 1.0)
        try:
            self._factor = scipy.linalg.cho_factor(system)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"I - alpha*S not positive definite: {exc}") from exc

    def propagate(self, labels: np.ndarray, labeled_mask: np.ndarray) -> ScoreMatrix:
        labels = np.asarray(labels, dtype=np.float64)
        labeled_mask = np.asarray(labeled_mask, dtype=bool)
        _check_label_matrix(labels, labeled_mask)
        if self.graph.n != labels.shape[0]:
            raise ConfigError("label matrix rows do not match the graph")
        rhs = (1.0 - self.alpha) * labels
        scores = scipy.linalg.cho_solve(self._factor, rhs)
        defect = scores - self.alpha * (self._sim @ scores) - rhs
        return ScoreMatrix(
            values=scores, method_tag="lgc", residual=float(np.abs(defect).max())
        )


def lgc_propagate(
    graph: Graph, labels: np.ndarray, labeled_mask: np.ndarray, alpha: float
) -> ScoreMatrix:
    """Closed-form local and global consistency: F = (1-a)(I - aS)^-1 Y."""
    return LgcSolver(graph, alpha).propagate(labels, labeled_mask)


def lgc_iterate(
    graph: Graph,
    labels: np.ndarray,
    labeled_mask: np.ndarray,
    alpha: float,
    tol: float = 1e-10,
    max_iter: int = 100000,
) -> ScoreMatrix:
    """Fixed-point iteration F <- alpha*S*F + (1-alpha)*Y starting at F = Y.

    Mainly a cross-check for the closed form. Non-convergence within
    ``max_iter`` is reported through the result, never silently truncated.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    if max_iter < 0:
        raise ConfigError(f"max_iter must be >= 0, got {max_iter}")
    labels = np.asarray(labels, dtype=np.float64)
    labeled_mask = np.asarray(labeled_mask, dtype=bool)
    _check_label_matrix(labels, labeled_mask)
    sim = laplacians(graph).normalized_similarity
    base = (1.0 - alpha) * labels
    scores = np.array(labels, copy=True)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = alpha * (sim @ scores) + base
        delta = float(np.abs(nxt - scores).max())
        scores = nxt
        if delta < tol:
            converged = True
            break
    if max_iter == 0:
        iterations = 0
    defect = scores - alpha * (sim @ scores) - base
    return ScoreMatrix(
        values=scores,
        method_tag="lgc",
        residual=float(np.abs(defect).max()),
        iterations=iterations,
        converged=converged,
    )


def cmn_adjust(
    scores: ScoreMatrix, unlabeled_mask: np.ndarray, prior: np.ndarray
) -> ScoreMatrix:
    """Class-mass normalization: rescale unlabeled columns to a target prior.

    Each unlabeled score column is multiplied by ``prior_j / mass_j`` where
    ``mass_j`` is the column total over unlabeled rows. Labeled rows pass
    through unchanged.
    """
    prior = np.asarray(prior, dtype=np.float64)
    unlabeled_mask = np.asarray(unlabeled_mask, dtype=bool)
    if prior.shape != (scores.class_count,):
        raise ConfigError(
            f"prior must have {scores.class_count} entries, got shape {prior.shape}"
        )
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-12:
        raise ConfigError("prior entries must be nonnegative and sum to 1")
    if unlabeled_mask.shape != (scores.n,):
        raise ConfigError("unlabeled mask length must match score rows")
    values = np.array(scores.values, copy=True)
    if unlabeled_mask.any():
        mass = values[unlabeled_mask].sum(axis=0)
        if np.any(mass <= 0.0):
            dead = np.flatnonzero(mass <= 0.0).tolist()
            raise NumericalError(
                f"classes {dead} carry zero score mass on the unlabeled set; "
                f"cannot renormalize"
            )
        values[unlabeled_mask] = values[unlabeled_mask] * (prior / mass)
    return ScoreMatrix(
        values=values,
        method_tag=scores.method_tag,
        residual=scores.residual,
        iterations=scores.iterations,
        converged=scores.converged,
    )


def predict(scores: ScoreMatrix) -> np.ndarray:
    """Arg-max class per sample, ties resolved toward the lower index."""
    return np.argmax(scores.values, axis=1).astype(np.int64)
