import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from multispec.eigen import (
    DegenerateEmbeddingError,
    all_eigenvalues,
    normalize_rows,
    top_k_eigenpairs,
)

from oracles import jacobi_eigenvalues, principal_angle


def random_symmetric_int(rng, n, low=-5, high=6):
    m = rng.integers(low, high, size=(n, n))
    m = np.triu(m, 1)
    return (m + m.T + np.diag(rng.integers(low, high, size=n))).astype(float)


class TestTopK:
    def test_diagonal(self):
        emb = top_k_eigenpairs(np.diag([3.0, 2.0, 1.0]), 2)
        assert np.allclose(emb.values, [3.0, 2.0])
        span = np.abs(emb.vectors)
        assert span[2].max() < 1e-12  # orthogonal to e3

    def test_all_ones_2x2(self):
        emb = top_k_eigenpairs(np.ones((2, 2)), 1)
        assert emb.values[0] == pytest.approx(2.0)
        assert np.allclose(np.abs(emb.vectors[:, 0]), 1 / np.sqrt(2))

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            top_k_eigenpairs(np.eye(3), 4)

    def test_non_symmetric_rejected(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="not symmetric"):
            top_k_eigenpairs(m, 1)
        with pytest.raises(ValueError, match="not symmetric"):
            all_eigenvalues(sp.csr_matrix(m))

    @pytest.mark.parametrize("cutoff", [256, 0])
    def test_matches_jacobi_oracle(self, cutoff):
        rng = np.random.default_rng(42)
        for _ in range(8):
            n = int(rng.integers(10, 41))
            m = random_symmetric_int(rng, n)
            k = int(rng.integers(1, 5))
            emb = top_k_eigenpairs(sp.csr_matrix(m), k, seed=1, dense_cutoff=cutoff)
            oracle = jacobi_eigenvalues(m)
            assert np.abs(emb.values - oracle[:k]).max() < 1e-8
            # residuals
            r = m @ emb.vectors - emb.vectors * emb.values
            assert (np.linalg.norm(r, axis=0) <= 1e-6 * np.maximum(1, np.abs(emb.values))).all()
            # orthonormal columns
            assert np.allclose(emb.vectors.T @ emb.vectors, np.eye(k), atol=1e-8)

    def test_subspace_agreement_when_gap_clear(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            n = 30
            m = random_symmetric_int(rng, n)
            w, v = jacobi_eigenvalues(m, want_vectors=True)
            k = 3
            if w[k - 1] - w[k] <= 1e-4:
                continue
            emb = top_k_eigenpairs(m, k, seed=2, dense_cutoff=0)
            assert principal_angle(emb.vectors, v[:, :k]) < 1e-6

    def test_lanczos_on_larger_sparse(self):
        rng = np.random.default_rng(3)
        n = 500
        m = sp.random(n, n, density=0.02, random_state=3, format="csr")
        m = m + m.T
        emb = top_k_eigenpairs(m, 4, seed=5)
        dense = np.linalg.eigvalsh(m.toarray())[::-1]
        assert np.abs(emb.values - dense[:4]).max() < 1e-8

    def test_zero_matrix_high_multiplicity(self):
        emb = top_k_eigenpairs(sp.csr_matrix((400, 400)), 3, seed=0, dense_cutoff=0)
        assert np.allclose(emb.values, 0.0)
        assert emb.gap_ambiguous
        assert np.allclose(emb.vectors.T @ emb.vectors, np.eye(3), atol=1e-8)

    def test_block_multiplicity_converges(self):
        # two identical disjoint cliques: top eigenvalue has multiplicity 2
        a = np.ones((20, 20)) - np.eye(20)
        m = sp.block_diag([a, a]).tocsr()
        emb = top_k_eigenpairs(m, 2, seed=0, dense_cutoff=0)
        assert np.allclose(emb.values, 19.0)
        assert emb.gap_ambiguous is False  # gap to -1 is wide

    def test_permutation_invariant_values(self):
        rng = np.random.default_rng(12)
        m = random_symmetric_int(rng, 25)
        perm = rng.permutation(25)
        a = top_k_eigenpairs(m, 3, seed=1).values
        b = top_k_eigenpairs(m[np.ix_(perm, perm)], 3, seed=1).values
        assert np.allclose(a, b, atol=1e-10)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(8)
        m = sp.csr_matrix(random_symmetric_int(rng, 300))
        a = top_k_eigenpairs(m, 2, seed=4)
        b = top_k_eigenpairs(m, 2, seed=4)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.vectors, b.vectors)


class TestAllEigenvalues:
    def test_descending_and_complete(self):
        rng = np.random.default_rng(1)
        m = random_symmetric_int(rng, 20)
        vals = all_eigenvalues(m)
        assert len(vals) == 20
        assert (np.diff(vals) <= 1e-12).all()

    @given(
        hnp.arrays(
            np.int64,
            st.integers(2, 8).map(lambda n: (n, n)),
            elements=st.integers(-4, 4),
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_trace_identity(self, raw):
        m = (np.triu(raw, 1) + np.triu(raw, 1).T + np.diag(np.diag(raw))).astype(float)
        vals = all_eigenvalues(m)
        assert vals.sum() == pytest.approx(np.trace(m), rel=1e-6, abs=1e-6)


class TestNormalizeRows:
    def test_zero_row_dropped(self):
        emb = top_k_eigenpairs(np.diag([2.0, 1.0, 0.0]), 2)
        nz = normalize_rows(emb)
        assert nz.indices.tolist() == [0, 1]
        assert np.allclose(np.linalg.norm(nz.rows, axis=1), 1.0, atol=1e-12)

    def test_unit_rows_unchanged(self):
        vecs = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
        from multispec.eigen import SpectralEmbedding

        emb = SpectralEmbedding(values=np.array([1.0, 0.5]), vectors=vecs, n_prime=3)
        nz = normalize_rows(emb)
        assert nz.indices.tolist() == [0, 1, 2]
        assert np.allclose(nz.rows, vecs)

    def test_single_nonzero_row(self):
        from multispec.eigen import SpectralEmbedding

        vecs = np.zeros((3, 2))
        vecs[1] = [3.0, 4.0]
        emb = SpectralEmbedding(values=np.array([1.0, 0.5]), vectors=vecs, n_prime=3)
        nz = normalize_rows(emb)
        assert nz.indices.tolist() == [1]
        assert np.allclose(nz.rows, [[0.6, 0.8]])

    def test_all_zero_rows_error(self):
        from multispec.eigen import SpectralEmbedding

        emb = SpectralEmbedding(values=np.array([0.0]), vectors=np.zeros((4, 1)), n_prime=4)
        with pytest.raises(DegenerateEmbeddingError):
            normalize_rows(emb)
