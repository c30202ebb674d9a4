"""Independent reference implementations and small file builders for tests.

Everything here is deliberately written in plain Python (dicts, lists,
sorted loops) so the production numpy code is checked against a second,
structurally different reading of the same definitions.
"""

from __future__ import annotations

import math
import struct

import numpy as np

UNLABELED = -1


def write_idx_images(path, images: np.ndarray) -> None:
    """Serialize an (n, 28, 28) uint8 array in big-endian IDX format."""
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as handle:
        handle.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        handle.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as handle:
        handle.write(struct.pack(">II", 0x00000801, labels.shape[0]))
        handle.write(labels.tobytes())


def brute_knn_edges(points, k):
    """Union-symmetrized kNN edge set computed with sorted python loops."""
    points = [list(map(float, p)) for p in points]
    n = len(points)
    d2 = [
        [sum((a - b) ** 2 for a, b in zip(points[i], points[j])) for j in range(n)]
        for i in range(n)
    ]
    edges = set()
    for i in range(n):
        order = sorted((d2[i][j], j) for j in range(n) if j != i)
        for _, j in order[:k]:
            edges.add((min(i, j), max(i, j)))
    return edges, d2


def count_variance(counts, divisor="c-1"):
    c = len(counts)
    mean = sum(counts) / c
    ss = sum((x - mean) ** 2 for x in counts)
    return math.sqrt(ss / (c - 1 if divisor == "c-1" else c))


def transliterated_balance(weights, assignment, class_count, stop_s, divisor="c-1"):
    """Line-by-line reading of the balancing loop over a dense weight matrix.

    Returns the event log as tuples ``(action, iteration, class, sample,
    weight)`` plus the final labeled map and bookkeeping vectors.
    """
    n = len(assignment)
    neighbors = {
        i: [j for j in range(n) if weights[i][j] > 0.0] for i in range(n)
    }
    labeled = {i: int(a) for i, a in enumerate(assignment) if a != UNLABELED}
    true_counts = [0] * class_count
    for a in labeled.values():
        true_counts[a] += 1
    effective = list(true_counts)
    saturated = set()
    log = []
    iteration = 0
    while count_variance(effective, divisor) > stop_s:
        open_classes = [j for j in range(class_count) if j not in saturated]
        if not open_classes:
            break
        j = min(open_classes, key=lambda cls: (effective[cls], cls))
        iteration += 1
        best = None  # (weight, sample)
        for x in sorted(i for i, a in labeled.items() if a == j):
            for u in neighbors[x]:
                if u in labeled:
                    continue
                if any(labeled.get(v, j) != j for v in neighbors[u]):
                    continue
                w = weights[x][u]
                if best is None or w > best[0] or (w == best[0] and u < best[1]):
                    best = (w, u)
        if best is None:
            saturated.add(j)
            effective[j] = max(effective)
            log.append(("saturated", iteration, j, None, None))
        else:
            w, u = best
            labeled[u] = j
            true_counts[j] += 1
            effective[j] += 1
            log.append(("added", iteration, j, u, w))
    return log, labeled, true_counts, effective, saturated


def production_log_tuples(log):
    """Normalize production events to the transliteration's tuple shape."""
    return [
        (e.action, e.iteration, e.class_index, e.sample_index, e.weight)
        for e in log
    ]


def random_instance(rng, n_max=50, class_count=None):
    """Random points, kNN graph parameters, and a seeded labeled assignment.

    Guarantees at least one labeled sample per class so balancing has
    anchors to grow from.
    """
    n = int(rng.integers(8, n_max + 1))
    c = int(class_count if class_count is not None else rng.integers(2, 4))
    d = int(rng.integers(1, 4))
    points = rng.normal(0.0, 1.0, size=(n, d))
    k = int(rng.integers(1, min(6, n - 1) + 1))
    sigma = float(rng.uniform(0.5, 2.0))
    truth = rng.integers(0, c, size=n)
    # force every class to own at least two samples
    for j in range(c):
        slots = rng.choice(n, size=2, replace=False)
        truth[slots] = j
    assignment = np.full(n, UNLABELED, dtype=np.int64)
    for j in range(c):
        members = np.flatnonzero(truth == j)
        take = int(rng.integers(1, min(3, members.size) + 1))
        assignment[rng.choice(members, size=take, replace=False)] = j
    return points, k, sigma, truth, assignment
