import numpy as np
import pytest

from crowdflow.errors import DimensionMismatch
from crowdflow.metrics import (
    EVAL_COLUMNS,
    eval_row,
    jaccard,
    match_segments,
    overlap_matrix,
    timing_report,
)
from crowdflow.oracles import brute_force_assignment


def random_map(rng, shape=(12, 15), k=4):
    return rng.integers(0, k + 1, shape)


def relabel(m, rng):
    labels = np.unique(m[m > 0])
    new = rng.permutation(np.arange(100, 100 + len(labels)))
    out = m.copy()
    for a, b in zip(labels, new):
        out[m == a] = b
    return out


class TestMatch:
    def test_identity(self):
        a = np.array([[1, 1, 2], [0, 3, 3]])
        assert match_segments(a, a) == {1: 1, 2: 2, 3: 3}

    def test_permutation_recovered(self):
        a = np.array([[1, 1, 2], [0, 3, 3]])
        b = np.choose(a, [0, 7, 5, 9])
        assert match_segments(a, b) == {1: 7, 2: 5, 3: 9}

    @pytest.mark.parametrize("seed", range(25))
    def test_optimal_vs_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 3, (8, 8))  # two segments
        b = rng.integers(0, 4, (8, 8))  # three segments
        counts, la, lb = overlap_matrix(a, b)
        best, _ = brute_force_assignment(counts)
        mapping = match_segments(a, b)
        got = sum(counts[np.searchsorted(la, x), np.searchsorted(lb, y)] for x, y in mapping.items())
        assert got == best
        assert len(mapping) == 2

    def test_zero_overlap_unmatched(self):
        a = np.array([[1, 0], [0, 0]])
        b = np.array([[0, 2], [0, 0]])
        assert match_segments(a, b) == {}

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            match_segments(np.zeros((2, 2), int), np.zeros((2, 3), int))


class TestJaccard:
    def test_hand_count(self):
        a = np.zeros(16, int)
        b = np.zeros(16, int)
        a[1:9] = 1
        b[5:13] = 7
        assert jaccard(a.reshape(4, 4), b.reshape(4, 4)) == pytest.approx(1 / 3)

    def test_both_empty(self):
        z = np.zeros((3, 3), int)
        assert jaccard(z, z) == 1.0

    def test_disjoint(self):
        a = np.array([[1, 1, 0, 0]])
        b = np.array([[0, 0, 2, 2]])
        assert jaccard(a, b) == 0.0

    def test_background_false_positive_counts_in_union(self):
        a = np.array([[1, 1, 0, 0]])
        b = np.array([[1, 1, 1, 1]])
        assert jaccard(a, b) == 0.5

    def test_unmatched_predicted_segment(self):
        a = np.array([[1, 1, 1, 1]])
        b = np.array([[2, 2, 3, 3]])
        assert jaccard(a, b) == 0.5

    @pytest.mark.parametrize("seed", range(20))
    def test_properties(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_map(rng), random_map(rng)
        j = jaccard(a, b)
        assert 0 <= j <= 1
        assert j == pytest.approx(jaccard(b, a))
        assert jaccard(relabel(a, rng), b) == pytest.approx(j)
        assert jaccard(a, relabel(a, rng)) == 1.0

    def test_one_iff_identical_up_to_permutation(self):
        a = np.array([[1, 1, 2, 0]])
        assert jaccard(a, np.array([[2, 2, 1, 0]])) == 1.0
        assert jaccard(a, np.array([[2, 2, 1, 1]])) < 1.0
        assert jaccard(a, np.array([[2, 1, 1, 0]])) < 1.0


class TestReports:
    def test_eval_row(self):
        a = np.array([[1, 1, 2, 0]])
        row = eval_row("seq1", a, a, 0.25)
        assert list(row) == list(EVAL_COLUMNS)
        assert row["jaccard"] == "1.000000" and row["n_flows_pred"] == 2
        assert row["time_total_s"] == "0.250000"

    def test_timing_empty(self):
        text, csv_text = timing_report([])
        assert csv_text == "sequence,coarse_s,fine_s,merge_s,total_s\n"
        assert len(text.splitlines()) == 1

    def test_timing_one(self):
        _, csv_text = timing_report([("a", {"coarse": 0.1, "fine": 0.02, "merge": 0.001, "total": 0.121})])
        assert csv_text.splitlines()[1] == "a,0.1000,0.0200,0.0010,0.1210"

    def test_timing_order(self):
        rows = [(n, {"total": 1.0}) for n in ("seq3", "seq1", "seq2")]
        text, csv_text = timing_report(rows)
        assert [line.split(",")[0] for line in csv_text.splitlines()[1:]] == ["seq3", "seq1", "seq2"]
        assert [line.split()[0] for line in text.splitlines()[1:]] == ["seq3", "seq1", "seq2"]
