import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multispec.evaluate import misclassification, nmi

from oracles import min_error_over_permutations

label_vectors = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
    )
)


class TestNmi:
    def test_identical(self):
        x = np.array([0, 0, 1, 1, 2])
        assert nmi(x, x) == 1.0

    def test_relabeled(self):
        truth = np.array([0, 0, 1, 1])
        assert nmi(truth, 1 - truth) == 1.0

    def test_independent_partitions(self):
        assert nmi(np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_zero_entropy_conventions(self):
        const = np.zeros(4, dtype=int)
        split = np.array([0, 0, 1, 1])
        assert nmi(const, const) == 1.0
        assert nmi(const, split) == 0.0
        assert nmi(split, const) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            nmi(np.zeros(3, dtype=int), np.zeros(4, dtype=int))

    @given(label_vectors)
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_range(self, pair):
        x, y = (np.array(v) for v in pair)
        v = nmi(x, y)
        assert v == nmi(y, x)
        assert 0.0 <= v <= 1.0


class TestMisclassification:
    def test_exact_match(self):
        x = np.array([0, 1, 2, 0, 1, 2])
        rep = misclassification(x, x)
        assert rep.overall_error == 0.0
        assert (rep.per_community == 0).all()
        assert rep.nmi == 1.0

    def test_five_flips(self):
        truth = np.repeat([0, 1], 50)
        est = truth.copy()
        est[:5] = 1
        rep = misclassification(truth, est)
        assert rep.overall_error == pytest.approx(0.05)
        assert rep.per_community[0] == pytest.approx(0.1)
        assert rep.per_community[1] == 0.0

    def test_bijection_invariance(self):
        rng = np.random.default_rng(0)
        truth = rng.integers(0, 3, size=60)
        est = rng.integers(0, 3, size=60)
        base = misclassification(truth, est).overall_error
        for perm in ([1, 2, 0], [2, 1, 0], [0, 2, 1]):
            relabeled = np.array(perm)[est]
            assert misclassification(truth, relabeled).overall_error == pytest.approx(base)

    def test_permuted_labels_zero_error(self):
        truth = np.array([0, 0, 1, 1, 2, 2])
        est = (truth + 1) % 3
        rep = misclassification(truth, est)
        assert rep.overall_error == 0.0

    def test_k_mismatch_padded(self):
        truth = np.array([0, 0, 1, 1])
        est = np.array([0, 1, 2, 3])
        rep = misclassification(truth, est)
        assert rep.confusion.shape == (4, 4)
        assert rep.overall_error == pytest.approx(0.5)

    def test_matches_brute_force_over_permutations(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            K = int(rng.integers(2, 5))
            n = int(rng.integers(5, 40))
            truth = rng.integers(0, K, size=n)
            est = rng.integers(0, K, size=n)
            rep = misclassification(truth, est)
            assert rep.overall_error == pytest.approx(
                min_error_over_permutations(truth, est, K)
            )
