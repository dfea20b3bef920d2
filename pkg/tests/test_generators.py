import numpy as np
import pytest

from rowblock import (
    BlockedMatrixSpec,
    RmatSpec,
    gen_blocked,
    gen_rmat,
    permute_rows,
    rmat_edge_draws,
    scramble,
)

from conftest import random_csr


class TestGenBlocked:
    def test_reference_counts(self):
        A = gen_blocked(BlockedMatrixSpec(1024, 1024, 32, 0.1, 0.2, seed=7))
        # 1024 blocks, 102 selected, 205 cells each
        assert A.nnz == 102 * 205 == 20910

    @pytest.mark.parametrize("delta,theta,rho", [
        (8, 0.1, 0.05), (8, 0.37, 0.33), (8, 0.8, 0.9),
        (16, 0.1, 0.33), (16, 0.37, 0.9), (16, 0.8, 0.05),
        (32, 0.1, 0.9), (32, 0.37, 0.05), (32, 0.8, 0.33),
    ])
    def test_exact_nnz_grid(self, delta, theta, rho):
        spec = BlockedMatrixSpec(256, 256, delta, theta, rho, seed=11)
        n_sel = int(np.floor(theta * spec.n_blocks + 0.5))  # round half up
        per_block = int(np.floor(rho * delta * delta + 0.5))
        assert gen_blocked(spec).nnz == n_sel * per_block

    def test_saturation_is_dense(self):
        A = gen_blocked(BlockedMatrixSpec(16, 16, 4, 1.0, 1.0, seed=0))
        assert A.nnz == 256
        assert np.all(A.to_dense() == 1.0)

    def test_determinism(self):
        spec = BlockedMatrixSpec(64, 64, 8, 0.3, 0.4, seed=123)
        A, B = gen_blocked(spec), gen_blocked(spec)
        assert np.array_equal(A.row_ptr, B.row_ptr)
        assert np.array_equal(A.col_idx, B.col_idx)

    def test_non_divisible_delta_rejected(self):
        with pytest.raises(ValueError):
            BlockedMatrixSpec(100, 100, 32, 0.1, 0.1, seed=0)

    @pytest.mark.parametrize("theta,rho", [(0.0, 0.5), (0.5, 0.0), (1.5, 0.5)])
    def test_bad_fractions_rejected(self, theta, rho):
        with pytest.raises(ValueError):
            BlockedMatrixSpec(64, 64, 8, theta, rho, seed=0)


class TestGenRmat:
    def test_edge_draw_count(self):
        spec = RmatSpec(14, 8, seed=1)
        assert spec.n_edge_draws == 131072
        r, c = rmat_edge_draws(spec)
        assert len(r) == len(c) == 131072

    def test_nnz_bounded_by_draws(self):
        A = gen_rmat(RmatSpec(10, 8, seed=2))
        assert 0 < A.nnz <= 8192

    def test_degenerate_quadrant(self):
        A = gen_rmat(RmatSpec(6, 4, probabilities=(1.0, 0.0, 0.0, 0.0), seed=3))
        assert A.nnz == 1
        assert A.to_dense()[0, 0] == 1.0

    def test_determinism(self):
        spec = RmatSpec(9, 4, seed=77)
        A, B = gen_rmat(spec), gen_rmat(spec)
        assert np.array_equal(A.col_idx, B.col_idx)

    def test_top_level_quadrant_frequencies(self):
        spec = RmatSpec(14, 8, seed=5)  # 2**17 draws
        r, c = rmat_edge_draws(spec)
        half = spec.n_nodes // 2
        quad = (r >= half).astype(int) * 2 + (c >= half).astype(int)
        counts = np.bincount(quad, minlength=4)
        n = spec.n_edge_draws
        for k, p in enumerate(spec.probabilities):
            sigma = np.sqrt(p * (1 - p) / n)
            assert abs(counts[k] / n - p) <= 3 * sigma

    def test_bad_probabilities_rejected(self):
        with pytest.raises(ValueError):
            RmatSpec(4, 2, probabilities=(0.5, 0.5, 0.5, 0.5))


class TestScramble:
    def test_single_row_unchanged(self):
        A = random_csr(np.random.default_rng(0), 1, 5, 0.5)
        S, perm = scramble(A, 9)
        assert perm.tolist() == [0]
        assert np.array_equal(S.col_idx, A.col_idx)

    def test_inverse_restores(self, rng):
        A = random_csr(rng, 20, 10, 0.2)
        S, perm = scramble(A, 42)
        R = permute_rows(S, np.argsort(perm))
        assert np.array_equal(R.row_ptr, A.row_ptr)
        assert np.array_equal(R.col_idx, A.col_idx)
        assert np.array_equal(R.values, A.values)

    def test_determinism(self, rng):
        A = random_csr(rng, 30, 10, 0.2)
        _, p1 = scramble(A, 5)
        _, p2 = scramble(A, 5)
        assert np.array_equal(p1, p2)

    def test_preserves_row_multiset(self, rng):
        A = random_csr(rng, 15, 12, 0.3)
        S, _ = scramble(A, 3)
        rows_a = sorted(tuple(A.row_cols(i).tolist()) for i in range(15))
        rows_s = sorted(tuple(S.row_cols(i).tolist()) for i in range(15))
        assert rows_a == rows_s
