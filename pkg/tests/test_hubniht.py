"""Tests for hard thresholding and the sparse robust fitter."""

import numpy as np
import pytest
from scipy import optimize

import oracles
from huberfit import (
    HuberKernel,
    SolverConfig,
    SparseProblem,
    fit_sparse,
    hard_threshold,
    reconstruct,
)

K95 = HuberKernel(1.345)
KLS = HuberKernel(1e6)


def sparse_config(c=1.345, tol=1e-9, max_iter=2000):
    return SolverConfig(kernel=HuberKernel(c), tol=tol, max_iter=max_iter)


class TestHardThreshold:
    def test_keeps_largest_two(self):
        assert np.array_equal(hard_threshold([3.0, -5.0, 1.0, 0.0], 2), [3.0, -5.0, 0.0, 0.0])

    def test_tie_keeps_smallest_index(self):
        assert np.array_equal(hard_threshold([2.0, -2.0], 1), [2.0, 0.0])

    def test_pass_through_when_sparse_enough(self):
        b = np.array([0.0, 1.0, 0.0, -2.0, 0.5])
        assert np.array_equal(hard_threshold(b, 4), b)

    def test_idempotent(self):
        b = np.array([4.0, -1.0, 3.0, 0.2, 0.0, 7.0])
        once = hard_threshold(b, 3)
        assert np.array_equal(hard_threshold(once, 3), once)

    def test_never_increases_norm(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            b = rng.standard_normal(15)
            for k in (0, 1, 5, 15, 20):
                assert np.linalg.norm(hard_threshold(b, k)) <= np.linalg.norm(b) + 1e-15

    def test_zero_budget(self):
        assert np.array_equal(hard_threshold([1.0, 2.0], 0), [0.0, 0.0])

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            hard_threshold([1.0], -1)


class TestFitSparse:
    def test_orthonormal_noiseless_exact(self):
        y = np.zeros(8)
        y[2], y[5] = 3.0, -2.0
        prob = SparseProblem(y=y, X=np.eye(8), K=2)
        model = fit_sparse(prob, sparse_config())
        assert model.support == (2, 5)
        assert np.allclose(model.beta[[2, 5]], [3.0, -2.0], atol=1e-10)
        assert np.max(np.abs(reconstruct(prob, model) - y)) <= 1e-8

    def test_noiseless_recovery_matches_restricted_lstsq(self):
        hits = 0
        for seed in range(20):
            y, X, support, _ = oracles.make_sparse_instance(1000 + seed)
            prob = SparseProblem(y=y, X=X, K=4)
            model = fit_sparse(prob, sparse_config())
            if model.support == tuple(support):
                hits += 1
                ref = oracles.restricted_lstsq(X, support, y)
                assert np.max(np.abs(model.beta - ref)) <= 1e-6
        assert hits >= 19

    def test_contaminated_huber_beats_ls(self):
        hub = ls = 0
        for seed in range(30):
            y, X, support, _ = oracles.make_sparse_instance(1000 + seed, flip_eps=0.10)
            prob = SparseProblem(y=y, X=X, K=4)
            hub += fit_sparse(prob, sparse_config(c=1.345)).support == tuple(support)
            ls += fit_sparse(prob, sparse_config(c=1e6)).support == tuple(support)
        assert hub > ls

    def test_iterates_respect_sparsity(self):
        y, X, _, _ = oracles.make_sparse_instance(7)
        for max_iter in (1, 2, 5, 50):
            model = fit_sparse(SparseProblem(y=y, X=X, K=4), sparse_config(max_iter=max_iter))
            assert np.count_nonzero(model.beta) <= 4
            assert model.support == tuple(np.flatnonzero(model.beta))

    def test_zero_measurements_perfect_fit(self):
        prob = SparseProblem(y=np.zeros(6), X=np.eye(6), K=2)
        model = fit_sparse(prob, sparse_config())
        assert model.perfect_fit and model.converged
        assert np.array_equal(model.beta, np.zeros(6))
        assert np.array_equal(reconstruct(prob, model), np.zeros(6))

    def test_deterministic(self):
        y, X, _, _ = oracles.make_sparse_instance(3)
        prob = SparseProblem(y=y, X=X, K=4)
        m1 = fit_sparse(prob, sparse_config())
        m2 = fit_sparse(prob, sparse_config())
        assert np.array_equal(m1.beta, m2.beta)
        assert m1.sigma == m2.sigma and m1.iterations == m2.iterations

    def test_K_validation(self):
        y, X = np.ones(4), np.ones((4, 8))
        for bad in (0, 5, -1):
            with pytest.raises(ValueError):
                SparseProblem(y=y, X=X, K=bad)

    def test_zero_column_rejected_when_normalizing(self):
        X = np.eye(4)
        X[:, 2] = 0.0
        with pytest.raises(ValueError):
            SparseProblem(y=np.ones(4), X=X, K=1)
        SparseProblem(y=np.ones(4), X=X, K=1, normalize_columns=False)  # allowed


class TestReconstruct:
    def test_zero_coefficients(self):
        y, X, _, _ = oracles.make_sparse_instance(5)
        prob = SparseProblem(y=y, X=X, K=2)
        model = fit_sparse(SparseProblem(y=np.zeros_like(y), X=X, K=2), sparse_config())
        assert np.array_equal(reconstruct(prob, model), np.zeros_like(y))

    def test_noiseless_reconstruction_is_exact(self):
        y, X, support, _ = oracles.make_sparse_instance(1002)
        prob = SparseProblem(y=y, X=X, K=4)
        model = fit_sparse(prob, sparse_config())
        assert model.support == tuple(support)
        assert np.max(np.abs(reconstruct(prob, model) - y)) <= 1e-8

    def test_column_rescaling_invariance(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((30, 60))
        X /= np.linalg.norm(X, axis=0)
        beta = np.zeros(60)
        beta[[5, 17, 40]] = [2.0, -1.5, 1.0]
        y = X @ beta + 0.05 * rng.standard_normal(30)
        X_scaled = X.copy()
        X_scaled[:, 17] *= 7.5
        p1 = SparseProblem(y=y, X=X, K=3)
        p2 = SparseProblem(y=y, X=X_scaled, K=3)
        r1 = reconstruct(p1, fit_sparse(p1, sparse_config(tol=1e-10)))
        r2 = reconstruct(p2, fit_sparse(p2, sparse_config(tol=1e-10)))
        assert np.max(np.abs(r1 - r2)) <= 1e-10

    def test_single_atom_matches_exhaustive_search(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((40, 12))
        X /= np.linalg.norm(X, axis=0)
        y = 3.0 * X[:, 7] + 0.1 * rng.standard_normal(40)
        prob = SparseProblem(y=y, X=X, K=1)
        model = fit_sparse(prob, sparse_config(tol=1e-10))

        def best_single_atom(j):
            def objective(v):
                coef, log_s = v
                s = np.exp(log_s)
                r = y - coef * X[:, j]
                return 40 * K95.alpha * s + s * float(np.sum(K95.rho(r / s)))

            res = optimize.minimize(
                objective,
                [float(X[:, j] @ y), 0.0],
                method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 5000},
            )
            return res.fun

        oracle_best = min(range(12), key=best_single_atom)
        assert model.support == (oracle_best,)
        ours = 40 * K95.alpha * model.sigma + model.sigma * float(
            np.sum(K95.rho((y - X @ model.beta) / model.sigma))
        )
        assert ours <= best_single_atom(oracle_best) * (1 + 1e-6)

    def test_dimension_mismatch(self):
        y, X, _, _ = oracles.make_sparse_instance(5)
        prob = SparseProblem(y=y, X=X, K=2)
        model = fit_sparse(prob, sparse_config())
        other = SparseProblem(y=np.ones(10), X=np.ones((10, 3)), K=1)
        with pytest.raises(ValueError):
            reconstruct(other, model)
