import numpy as np
import pytest

from multispec.kmeans import kmeans_approx, kmeans_exact, lloyd


def random_instance(rng):
    m = int(rng.integers(3, 11))
    d = int(rng.integers(1, 4))
    k = int(rng.integers(1, min(m, 3) + 1))
    return rng.standard_normal((m, d)) * rng.uniform(0.5, 3.0), k


class TestApprox:
    def test_separated_clouds(self):
        pts = np.vstack([np.zeros((5, 2)), np.full((5, 2), 10.0)])
        res = kmeans_approx(pts, 2, eps=0.5, seed=0)
        assert res.cost == pytest.approx(0.0, abs=1e-12)
        assert len(set(res.assignment[:5])) == 1
        assert res.assignment[0] != res.assignment[5]

    def test_m_equals_k(self):
        pts = np.array([[0.0], [5.0], [9.0]])
        res = kmeans_approx(pts, 3, eps=0.5, seed=1)
        assert res.cost == pytest.approx(0.0, abs=1e-12)
        assert len(set(res.assignment.tolist())) == 3

    def test_instance_errors(self):
        with pytest.raises(ValueError):
            kmeans_approx(np.zeros((2, 1)), 3, eps=0.5, seed=0)
        with pytest.raises(ValueError):
            kmeans_approx(np.array([[np.nan], [0.0]]), 1, eps=0.5, seed=0)
        with pytest.raises(ValueError):
            kmeans_approx(np.zeros((3, 1)), 1, eps=0.0, seed=0)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((40, 3))
        a = kmeans_approx(pts, 3, eps=0.5, seed=7)
        b = kmeans_approx(pts, 3, eps=0.5, seed=7)
        assert np.array_equal(a.assignment, b.assignment)
        assert a.cost == b.cost

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((20, 2))
        base = kmeans_approx(pts, 3, eps=0.5, seed=5)
        for _ in range(50):
            shift = rng.standard_normal(2) * 10
            res = kmeans_approx(pts + shift, 3, eps=0.5, seed=5)
            assert np.array_equal(res.assignment, base.assignment)
            assert res.cost == pytest.approx(base.cost, abs=1e-9)

    def test_cost_matches_stored_assignment(self):
        rng = np.random.default_rng(9)
        pts = rng.standard_normal((30, 2))
        res = kmeans_approx(pts, 4, eps=0.5, seed=2)
        recomputed = ((pts - res.centers[res.assignment]) ** 2).sum()
        assert res.cost == pytest.approx(recomputed, rel=1e-12)


class TestLloyd:
    def test_monotone_cost_trace(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            pts = rng.standard_normal((25, 2))
            centers = pts[rng.choice(25, size=3, replace=False)]
            res = lloyd(pts, centers)
            assert (np.diff(res.cost_trace) <= 1e-9).all()

    def test_empty_cluster_repair(self):
        # both initial centers coincide: one cluster starts empty
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        res = lloyd(pts, np.array([[0.0], [0.0]]))
        assert set(res.assignment.tolist()) == {0, 1}
        assert (np.diff(res.cost_trace) <= 1e-9).all()


class TestExact:
    def test_collinear_split(self):
        pts = np.array([[0.0], [1.0], [2.0], [10.0]])
        res = kmeans_exact(pts, 2)
        assert res.cost == pytest.approx(2.0)
        assert res.assignment[0] == res.assignment[1] == res.assignment[2]
        assert res.assignment[3] != res.assignment[0]

    def test_single_cluster_is_total_variance(self):
        rng = np.random.default_rng(2)
        pts = rng.standard_normal((8, 2))
        res = kmeans_exact(pts, 1)
        assert res.cost == pytest.approx(((pts - pts.mean(axis=0)) ** 2).sum())

    def test_k_equals_m(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((6, 2))
        assert kmeans_exact(pts, 6).cost == pytest.approx(0.0, abs=1e-12)

    def test_size_limit(self):
        with pytest.raises(ValueError):
            kmeans_exact(np.zeros((15, 1)), 2)

    def test_never_beaten_by_lloyd(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            pts, k = random_instance(rng)
            exact = kmeans_exact(pts, k)
            approx = kmeans_approx(pts, k, eps=0.5, seed=int(rng.integers(1 << 31)))
            assert approx.cost >= exact.cost - 1e-9


def test_one_plus_eps_contract_100_seeds():
    rng = np.random.default_rng(123)
    for seed in range(100):
        pts, k = random_instance(rng)
        exact = kmeans_exact(pts, k)
        approx = kmeans_approx(pts, k, eps=0.5, seed=seed)
        assert approx.cost <= 1.5 * exact.cost + 1e-9
