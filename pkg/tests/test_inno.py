"""Balancing loop semantics on hand-built graphs and random instances."""

import csv
import math

import numpy as np
import pytest

from gbssl.datasets import LabeledSplit
from gbssl.errors import ConfigError
from gbssl.graph import build_knn_graph
from gbssl.inno import (
    PROV_INNO,
    PROV_NONE,
    PROV_SEED,
    UNLABELED,
    Candidate,
    LabelState,
    best_candidate,
    export_addition_log,
    find_minority_class,
    imbalance_variance,
    inno_balance,
)

from helpers import count_variance, production_log_tuples, transliterated_balance


def make_state(assignment, class_count):
    """LabelState straight from an assignment vector, seeds marked as such."""
    assignment = np.asarray(assignment, dtype=np.int64)
    labeled = np.flatnonzero(assignment != UNLABELED)
    counts = np.bincount(assignment[labeled], minlength=class_count).astype(np.int64)
    provenance = np.full(assignment.shape[0], PROV_NONE, dtype=np.uint8)
    provenance[labeled] = PROV_SEED
    return LabelState(
        assignment=assignment.copy(),
        true_counts=counts,
        effective_counts=counts.copy(),
        saturated=np.zeros(class_count, dtype=bool),
        provenance=provenance,
    )


def line_graph(positions, k, sigma=1.0):
    points = np.asarray(positions, dtype=np.float64).reshape(-1, 1)
    return build_knn_graph(points, k, sigma)


class TestImbalanceVariance:
    def test_reference_value_three_classes(self):
        # counts (10, 1, 20): mean 31/3, corrected variance 90.333...
        assert imbalance_variance((10, 1, 20)) == pytest.approx(
            math.sqrt(271.0 / 3.0), rel=1e-14
        )
        assert imbalance_variance((10, 1, 20)) == pytest.approx(9.50, abs=5e-3)

    def test_reference_value_two_classes(self):
        assert imbalance_variance((23, 2)) == pytest.approx(
            math.sqrt(220.5), rel=1e-14
        )
        assert imbalance_variance((23, 2)) == pytest.approx(14.85, abs=5e-3)

    def test_population_divisor(self):
        assert imbalance_variance((10, 1, 20), divisor="c") == pytest.approx(
            math.sqrt(271.0 / 3.0) * math.sqrt(2.0 / 3.0), rel=1e-13
        )

    def test_balanced_counts_give_zero(self):
        assert imbalance_variance((7, 7, 7, 7)) == 0.0

    @pytest.mark.parametrize("divisor", ["c-1", "c"])
    def test_matches_python_oracle(self, divisor):
        rng = np.random.default_rng(3)
        for _ in range(25):
            c = int(rng.integers(2, 7))
            counts = rng.integers(0, 40, size=c).tolist()
            assert imbalance_variance(counts, divisor) == pytest.approx(
                count_variance(counts, divisor), rel=1e-13
            )

    def test_rejects_single_class_and_bad_divisor(self):
        with pytest.raises(ConfigError):
            imbalance_variance((5,))
        with pytest.raises(ConfigError):
            imbalance_variance((5, 5), divisor="n")


class TestLabelStateFromSplit:
    def test_seed_marking(self):
        labels = np.array([0, 0, 1, 1, 1])
        split = LabeledSplit(
            labeled_indices=np.array([0, 3]), unlabeled_indices=np.array([1, 2, 4]), seed=0
        )
        state = LabelState.from_split(labels, split, 2)
        assert state.assignment.tolist() == [0, -1, -1, 1, -1]
        assert state.true_counts.tolist() == [1, 1]
        assert state.effective_counts.tolist() == [1, 1]
        assert state.provenance.tolist() == [
            PROV_SEED,
            PROV_NONE,
            PROV_NONE,
            PROV_SEED,
            PROV_NONE,
        ]
        assert not state.saturated.any()

    def test_missing_seed_class_rejected(self):
        labels = np.array([0, 0, 1, 1])
        split = LabeledSplit(
            labeled_indices=np.array([0, 1]), unlabeled_indices=np.array([2, 3]), seed=0
        )
        with pytest.raises(ConfigError, match=r"\[1\]"):
            LabelState.from_split(labels, split, 2)

    def test_copy_is_independent(self):
        state = make_state([0, -1, 1], 2)
        clone = state.copy()
        clone.assignment[1] = 0
        clone.true_counts[0] += 1
        assert state.assignment[1] == UNLABELED
        assert state.true_counts.tolist() == [1, 1]


class TestFindMinorityClass:
    def test_smallest_effective_count(self):
        state = make_state([0, 0, 0, 1, 2, 2], 3)
        assert find_minority_class(state) == 1

    def test_tie_prefers_lowest_index(self):
        state = make_state([0, 0, 1, 2], 3)
        assert find_minority_class(state) == 1

    def test_saturated_classes_skipped(self):
        state = make_state([0, 1, 1, 2], 3)
        state.saturated[0] = True
        assert find_minority_class(state) == 2

    def test_all_saturated_gives_none(self):
        state = make_state([0, 1], 2)
        state.saturated[:] = True
        assert find_minority_class(state) is None


class TestBestCandidate:
    def test_strongest_neighbor_wins(self):
        # 0 -- 1 -- 2 chain; anchor at 1 would see both, anchor at 0 sees 1
        graph = line_graph([0.0, 1.0, 3.0, 6.0], 1, sigma=2.0)
        state = make_state([0, -1, -1, 1], 2)
        found = best_candidate(graph, state, 0)
        assert found == Candidate(1, pytest.approx(math.exp(-0.25)))

    def test_blocked_by_other_class_adjacency(self):
        # candidate 1 is nearer to the anchor but touches a class-1 label
        # through vertex 4; candidate 3 is clear and gets picked instead
        positions = [0.0, 1.0, 1.8, -1.2, 1.4, 10.0, 10.3, 10.6, 10.9, 11.2]
        graph = line_graph(positions, 2)
        state = make_state([0, -1, -1, -1, 1, 1, 1, 1, -1, -1], 2)
        assert 4 in graph.neighbors(1)
        found = best_candidate(graph, state, 0)
        assert found.index == 3
        assert found.weight == pytest.approx(math.exp(-1.44))

    def test_score_is_max_over_anchor_edges(self):
        # candidate 2 touches anchors 0 (far) and 1 (near); its score must
        # be the near edge, which beats candidate 3
        positions = [0.0, 2.0, 1.5, 2.7, 10.0, 10.1, 10.2]
        graph = line_graph(positions, 2)
        state = make_state([0, 0, -1, -1, 1, -1, -1], 2)
        found = best_candidate(graph, state, 0)
        assert found.index == 2
        assert found.weight == pytest.approx(math.exp(-0.25))

    def test_equal_weights_prefer_lower_index(self):
        positions = [0.0, -1.0, 1.0, 5.0, 6.0]
        graph = line_graph(positions, 1)
        state = make_state([0, -1, -1, 1, -1], 2)
        found = best_candidate(graph, state, 0)
        assert found.index == 1
        assert found.weight == pytest.approx(math.exp(-1.0))

    def test_no_open_neighbors_gives_none(self):
        graph = line_graph([0.0, 0.5, 0.9, 5.0, 5.4, 10.0], 1)
        state = make_state([1, 1, 0, -1, -1, -1], 2)
        assert best_candidate(graph, state, 0) is None

    def test_all_candidates_blocked_gives_none(self):
        # only neighbor of the class-0 anchor also touches a class-1 label
        graph = line_graph([0.0, 1.0, 2.0], 1)
        state = make_state([0, -1, 1], 2)
        assert best_candidate(graph, state, 0) is None

    def test_unknown_class_rejected(self):
        graph = line_graph([0.0, 1.0, 2.0], 1)
        state = make_state([0, -1, 1], 2)
        with pytest.raises(ConfigError):
            best_candidate(graph, state, 2)


class TestBalanceOnHandInstances:
    def test_blocked_then_saturated(self):
        # minority class 0 takes the clear candidate 3 first; afterwards the
        # only remaining neighbor is still blocked, so the class saturates
        # and its effective count snaps to the majority's
        positions = [0.0, 1.0, 1.8, -1.2, 1.4, 10.0, 10.3, 10.6, 10.9, 11.2]
        graph = line_graph(positions, 2)
        state = make_state([0, -1, -1, -1, 1, 1, 1, 1, -1, -1], 2)
        result = inno_balance(graph, state, 0.0)
        assert production_log_tuples(result.log) == [
            ("added", 1, 0, 3, pytest.approx(math.exp(-1.44))),
            ("saturated", 2, 0, None, None),
        ]
        assert result.additions == 1
        assert result.iterations == 2
        assert result.state.true_counts.tolist() == [2, 4]
        assert result.state.effective_counts.tolist() == [4, 4]
        assert result.state.saturated.tolist() == [True, False]
        assert result.state.assignment[3] == 0
        assert result.state.provenance[3] == PROV_INNO

    def test_immediate_saturation(self):
        graph = line_graph([0.0, 0.5, 0.9, 5.0, 5.4, 10.0], 1)
        state = make_state([1, 1, 0, -1, -1, -1], 2)
        result = inno_balance(graph, state, 0.0)
        assert production_log_tuples(result.log) == [
            ("saturated", 1, 0, None, None)
        ]
        assert result.additions == 0
        assert result.state.true_counts.tolist() == [1, 2]
        assert result.state.effective_counts.tolist() == [2, 2]

    def test_growth_walks_outward_through_additions(self):
        # vertex 2 is two hops from the seed, reachable only because the
        # promoted vertex 1 becomes an anchor for the next round
        graph = line_graph([0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 1)
        state = make_state([0, -1, -1, -1, 1, 1, 1], 2)
        result = inno_balance(graph, state, 0.0)
        assert production_log_tuples(result.log) == [
            ("added", 1, 0, 1, pytest.approx(math.exp(-1.0))),
            ("added", 2, 0, 2, pytest.approx(math.exp(-1.0))),
        ]
        assert result.state.true_counts.tolist() == [3, 3]
        assert not result.state.saturated.any()

    def test_two_cluster_growth_to_parity(self):
        positions = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 20.0, 20.1, 20.2, 20.3, 20.4, 20.5]
        graph = line_graph(positions, 2, sigma=5.0)
        state = make_state(
            [0, 0, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1], 2
        )
        result = inno_balance(graph, state, 0.0)
        assert result.additions == 2
        assert result.state.true_counts.tolist() == [4, 4]
        added = [e.sample_index for e in result.log if e.action == "added"]
        assert added == [2, 3]
        assert all(p < 6 for p in added)  # growth stays inside the minority blob

    def test_threshold_already_met_is_a_no_op(self):
        graph = line_graph([0.0, 1.0, 2.0, 3.0], 1)
        state = make_state([0, -1, 1, 1], 2)
        start = imbalance_variance(state.effective_counts)
        result = inno_balance(graph, state, start)
        assert result.log == []
        assert result.iterations == 0
        assert result.state.true_counts.tolist() == [1, 2]

    def test_intermediate_threshold_stops_early(self):
        # same two-cluster layout; a threshold between var(3,4) and var(2,4)
        # allows exactly one addition
        positions = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 20.0, 20.1, 20.2, 20.3, 20.4, 20.5]
        graph = line_graph(positions, 2, sigma=5.0)
        state = make_state(
            [0, 0, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1], 2
        )
        mid = (count_variance([3, 4]) + count_variance([2, 4])) / 2.0
        result = inno_balance(graph, state, mid)
        assert result.additions == 1
        assert result.state.true_counts.tolist() == [3, 4]

    def test_input_state_not_mutated(self):
        graph = line_graph([0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 1)
        state = make_state([0, -1, -1, -1, 1, 1, 1], 2)
        before = state.copy()
        inno_balance(graph, state, 0.0)
        assert np.array_equal(state.assignment, before.assignment)
        assert np.array_equal(state.true_counts, before.true_counts)
        assert np.array_equal(state.provenance, before.provenance)

    def test_negative_threshold_rejected(self):
        graph = line_graph([0.0, 1.0], 1)
        state = make_state([0, 1], 2)
        with pytest.raises(ConfigError):
            inno_balance(graph, state, -0.5)

    def test_size_mismatch_rejected(self):
        graph = line_graph([0.0, 1.0, 2.0], 1)
        state = make_state([0, 1], 2)
        with pytest.raises(ConfigError):
            inno_balance(graph, state, 0.0)


class TestAgainstTransliteration:
    @pytest.mark.parametrize("seed", range(30))
    def test_random_instance_equivalence(self, seed):
        from helpers import random_instance

        rng = np.random.default_rng(1000 + seed)
        points, k, sigma, _, assignment = random_instance(rng)
        class_count = int(assignment.max()) + 1
        graph = build_knn_graph(points, k, sigma)
        stop_s = 0.0 if seed % 3 else float(rng.uniform(0.0, 2.0))
        divisor = "c" if seed % 5 == 0 else "c-1"

        state = make_state(assignment, class_count)
        result = inno_balance(graph, state, stop_s, divisor)

        oracle_log, labeled, true_counts, effective, saturated = (
            transliterated_balance(
                graph.weights.toarray().tolist(),
                assignment.tolist(),
                class_count,
                stop_s,
                divisor,
            )
        )
        assert production_log_tuples(result.log) == [
            (a, i, j, u, w if w is None else pytest.approx(w, rel=1e-12))
            for a, i, j, u, w in oracle_log
        ]
        expected_assignment = [
            labeled.get(i, UNLABELED) for i in range(graph.n)
        ]
        assert result.state.assignment.tolist() == expected_assignment
        assert result.state.true_counts.tolist() == true_counts
        assert result.state.effective_counts.tolist() == effective
        assert set(np.flatnonzero(result.state.saturated)) == saturated


class TestAdditionLogExport:
    def test_roundtrip(self, tmp_path):
        graph = line_graph([0.0, 1.0, 1.8, -1.2, 1.4, 10.0, 10.3, 10.6, 10.9, 11.2], 2)
        state = make_state([0, -1, -1, -1, 1, 1, 1, 1, -1, -1], 2)
        result = inno_balance(graph, state, 0.0)
        path = tmp_path / "log.csv"
        export_addition_log(result.log, path)
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["iteration", "action", "class", "sample", "weight"]
        assert rows[1][:4] == ["1", "added", "0", "3"]
        assert float(rows[1][4]) == result.log[0].weight
        assert rows[2] == ["2", "saturated", "0", "", ""]
