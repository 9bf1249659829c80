import numpy as np
import pytest

from oracles import cross_entropy, softmax_probs
from seqmem import (Bucketizer, ClassifierError, Sdr, SoftmaxClassifier,
                    SymbolTable, point_prediction, random_sdr)


class TestSymbolTable:
    def make(self):
        table = SymbolTable(16)
        table.observe("a", Sdr(16, [0, 1, 2, 3]))
        table.observe("b", Sdr(16, [2, 3, 4, 5]))
        table.observe("c", Sdr(16, [10, 11, 12, 13]))
        return table

    def test_observe_and_code(self):
        table = self.make()
        assert len(table) == 3
        assert "b" in table and "z" not in table
        assert table.symbols == ("a", "b", "c")
        assert table.code("a") == Sdr(16, [0, 1, 2, 3])
        with pytest.raises(ClassifierError):
            table.code("z")

    def test_reobserve_same_code_is_a_noop(self):
        table = self.make()
        table.observe("a", Sdr(16, [0, 1, 2, 3]))
        assert len(table) == 3

    def test_reobserve_different_code_fails(self):
        table = self.make()
        with pytest.raises(ClassifierError):
            table.observe("a", Sdr(16, [0, 1, 2, 4]))

    def test_overlap_scores(self):
        table = self.make()
        assert table.overlaps(Sdr(16, [2, 3, 4])).tolist() == [2, 3, 0]

    def test_topk_ranking_and_overlap_values(self):
        table = self.make()
        assert table.classify_topk(Sdr(16, [2, 3, 4]), 2) == [("b", 3), ("a", 2)]

    def test_ties_keep_insertion_order(self):
        table = SymbolTable(8)
        table.observe("late", Sdr(8, [0, 1]))
        table.observe("early", Sdr(8, [0, 1]))
        # same overlap: the first symbol observed wins
        assert table.classify_topk(Sdr(8, [0, 1]), 2) \
            == [("late", 2), ("early", 2)]

    def test_k_larger_than_table_returns_everything(self):
        table = self.make()
        assert len(table.classify_topk(Sdr(16, [0]), 10)) == 3

    def test_empty_table(self):
        table = SymbolTable(8)
        assert table.classify_topk(Sdr(8, [0]), 3) == []
        assert table.classify(Sdr(8, [0])) is None

    def test_input_validation(self):
        table = self.make()
        with pytest.raises(ClassifierError):
            table.observe("d", Sdr(8, [0]))
        with pytest.raises(ClassifierError):
            table.overlaps(Sdr(8, [0]))
        with pytest.raises(ClassifierError):
            table.classify_topk(Sdr(16, [0]), 0)
        with pytest.raises(ClassifierError):
            SymbolTable(0)


class TestBucketizer:
    def test_edges_and_clamping(self):
        b = Bucketizer(0.0, 22.0, 22)
        assert b.bucket(0.0) == 0
        assert b.bucket(2.999) == 2
        assert b.bucket(3.0) == 3
        assert b.bucket(21.999) == 21
        assert b.bucket(22.0) == 21  # top edge clamps into the last bucket
        assert b.bucket(-5.0) == 0
        assert b.bucket(1e9) == 21

    def test_centers(self):
        b = Bucketizer(0.0, 22.0, 22)
        assert b.center(0) == 0.5
        assert b.center(21) == 21.5
        assert b.centers.tolist() == [i + 0.5 for i in range(22)]
        with pytest.raises(ClassifierError):
            b.center(22)

    def test_round_trip_containment(self):
        b = Bucketizer(0.0, 40000.0, 22)
        for value in [0.0, 1.0, 1818.0, 1819.0, 20000.0, 39999.0, 40000.0]:
            i = b.bucket(value)
            assert abs(b.center(i) - min(value, 40000.0)) <= 40000.0 / 22

    def test_validation(self):
        with pytest.raises(ClassifierError):
            Bucketizer(1.0, 1.0, 4)
        with pytest.raises(ClassifierError):
            Bucketizer(0.0, 1.0, 0)


def max_softmax_gradient_error(num_cases: int, seed: int = 0) -> float:
    """Largest relative gap between the layer's analytic log-loss gradient
    and central finite differences, across random weights/inputs/labels."""
    rng = np.random.default_rng(seed)
    eps = 1e-6
    worst = 0.0
    for _ in range(num_cases):
        num_classes = int(rng.integers(2, 8))
        width = int(rng.integers(6, 24))
        weights = rng.normal(0.0, 1.0, size=(num_classes, width))
        k = int(rng.integers(1, width // 2 + 1))
        active = np.sort(rng.choice(width, size=k, replace=False))
        label = int(rng.integers(0, num_classes))
        probs = softmax_probs(weights, active)
        onehot = np.zeros(num_classes)
        onehot[label] = 1.0
        analytic = probs - onehot  # dL/dw[r, j] for every active column j
        for r in range(num_classes):
            j = int(rng.choice(active))
            bumped = weights.copy()
            bumped[r, j] += eps
            up = cross_entropy(bumped, active, label)
            bumped[r, j] -= 2 * eps
            down = cross_entropy(bumped, active, label)
            numeric = (up - down) / (2 * eps)
            err = abs(analytic[r] - numeric) / max(abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst


class TestSoftmaxClassifier:
    def test_zero_weights_give_uniform(self):
        clf = SoftmaxClassifier(16, 4)
        probs = clf.infer(Sdr(16, [1, 5, 9]))
        assert probs.tolist() == [0.25, 0.25, 0.25, 0.25]

    def test_one_update_with_exact_arithmetic(self):
        clf = SoftmaxClassifier(4, 2, learning_rate=0.5)
        clf.update(Sdr(4, [0, 2]), 0)
        # uniform probs [.5,.5], one-hot [1,0]: grad [-0.5, 0.5], lr 0.5
        assert clf.weights[0].tolist() == [0.25, 0.0, 0.25, 0.0]
        assert clf.weights[1].tolist() == [-0.25, 0.0, -0.25, 0.0]
        probs = clf.infer(Sdr(4, [0, 2]))
        assert probs[0] == pytest.approx(1.0 / (1.0 + np.exp(-1.0)))

    def test_updates_concentrate_probability_on_the_label(self):
        clf = SoftmaxClassifier(32, 5, learning_rate=0.1)
        x = random_sdr(32, 8, seed=1)
        for _ in range(200):
            clf.update(x, 3)
        assert clf.infer(x)[3] > 0.9

    def test_gradient_matches_finite_differences(self):
        assert max_softmax_gradient_error(40, seed=5) < 1e-5

    def test_analytic_probs_match_oracle(self):
        rng = np.random.default_rng(2)
        clf = SoftmaxClassifier(12, 3)
        clf.weights[:] = rng.normal(size=clf.weights.shape)
        active = np.array([1, 4, 7])
        got = clf.infer(Sdr(12, active.tolist()))
        want = softmax_probs(clf.weights, active)
        assert np.allclose(got, want, rtol=1e-12, atol=0)

    def test_lookahead_pairs_past_activity_with_present_bucket(self):
        clf = SoftmaxClassifier(16, 3, learning_rate=0.1, lookahead=2)
        x0, x1, x2 = Sdr(16, [0, 1]), Sdr(16, [4, 5]), Sdr(16, [8, 9])
        clf.train(x0, 0)
        clf.train(x1, 1)
        assert not clf.weights.any()  # buffer not yet full
        clf.train(x2, 2)
        # exactly one update happened: (x0, bucket 2)
        touched = np.flatnonzero(clf.weights.any(axis=0))
        assert touched.tolist() == [0, 1]
        assert clf.weights[2, 0] > 0 > clf.weights[0, 0]

    def test_reset_drops_buffered_activity(self):
        clf = SoftmaxClassifier(16, 3, learning_rate=0.1, lookahead=1)
        clf.train(Sdr(16, [0]), 0)
        clf.reset()
        clf.train(Sdr(16, [1]), 1)
        assert not clf.weights.any()
        clf.train(Sdr(16, [2]), 2)
        assert clf.weights.any()

    def test_validation(self):
        with pytest.raises(ClassifierError):
            SoftmaxClassifier(0, 3)
        with pytest.raises(ClassifierError):
            SoftmaxClassifier(8, 3, learning_rate=0.0)
        with pytest.raises(ClassifierError):
            SoftmaxClassifier(8, 3, lookahead=-1)
        clf = SoftmaxClassifier(8, 3)
        with pytest.raises(ClassifierError):
            clf.infer(Sdr(4, [0]))
        with pytest.raises(ClassifierError):
            clf.update(Sdr(8, [0]), 3)


class TestPointPrediction:
    def test_argmax_tie_takes_the_lower_bucket(self):
        centers = np.array([10.0, 20.0, 30.0])
        assert point_prediction(np.array([0.4, 0.4, 0.2]), centers) == 10.0

    def test_expectation(self):
        value = point_prediction(np.array([0.25, 0.25, 0.5]),
                                 np.array([0.0, 10.0, 20.0]),
                                 mode="expectation")
        assert value == pytest.approx(12.5)

    def test_validation(self):
        with pytest.raises(ClassifierError):
            point_prediction(np.array([1.0]), np.array([1.0, 2.0]))
        with pytest.raises(ClassifierError):
            point_prediction(np.array([1.0]), np.array([1.0]), mode="median")
